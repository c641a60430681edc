// Copyright 2026 The Multihit Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "multihit/metrics.hpp"
#include "multihit/sched/nodes.hpp"

namespace multihit::sched {

// Single-threaded execution of one round. Every (from, to) pair is a FIFO
// channel; at each step a seeded RNG picks which non-empty channel delivers
// next, so a seed names one interleaving. Optionally every frame is pushed
// through encode/decode.
struct SimOptions {
  std::uint64_t interleaving_seed = 1;
  std::size_t max_steps = 50'000'000;
  bool serialize = false;
};

struct SimResult {
  std::optional<ScoredCombination> best;
  SearchStats stats;
  std::vector<RunMetrics> metrics;
  std::vector<LambdaInterval> processed;  // every chunk any worker computed
  bool terminated = false;                // every process reached done()
  bool premature = false;                 // Terminate sent while work was unprocessed
  std::size_t steps = 0;
  std::size_t token_hops = 0;
  std::size_t token_hops_after_last_chunk = 0;
  std::uint64_t faults = 0;
  std::uint64_t steals = 0;
};

SimResult simulate_round(const MutationMatrix& m, unsigned hits, double alpha, bool prune,
                         const SchedulerConfig& config, const SimOptions& options = {});

}  // namespace multihit::sched
