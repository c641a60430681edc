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

#include <cstdint>
#include <optional>
#include <vector>

#include "multihit/cover.hpp"
#include "multihit/metrics.hpp"
#include "multihit/sched/nodes.hpp"
#include "multihit/sched/transport.hpp"

namespace multihit::sched {

struct RoundResult {
  std::optional<ScoredCombination> best;  // tumor cover recomputed at the coordinator
  SearchStats stats;
  std::vector<RunMetrics> metrics;  // one row per compute worker
  std::vector<LambdaInterval> processed;
  double wall_seconds = 0.0;
  std::uint64_t faults = 0;
};

// Runs one argmax round with every leader and worker on its own thread,
// exchanging messages only through `transport` (which must have
// config.topology.process_count() endpoints and is closed on return). Any
// thread failure closes the transport and the round throws TransportError.
RoundResult run_round(const MutationMatrix& m, unsigned hits, double alpha, bool prune,
                      const SchedulerConfig& config, Transport& transport);
RoundResult run_round(const MutationMatrix& m, unsigned hits, double alpha, bool prune,
                      const SchedulerConfig& config, TransportKind kind = TransportKind::kChannel);

// Greedy-cover executor backed by run_round; keeps every round's metrics.
class ScheduledExecutor : public ArgmaxExecutor {
 public:
  ScheduledExecutor(SchedulerConfig config, TransportKind kind, bool prune = true)
      : config_(config), kind_(kind), prune_(prune) {}

  SearchResult argmax(const MutationMatrix& m, unsigned hits, double alpha) override;

  const std::vector<std::vector<RunMetrics>>& round_metrics() const { return round_metrics_; }
  std::uint64_t faults() const { return faults_; }

 private:
  SchedulerConfig config_;
  TransportKind kind_;
  bool prune_;
  std::vector<std::vector<RunMetrics>> round_metrics_;
  std::uint64_t faults_ = 0;
};

}  // namespace multihit::sched
