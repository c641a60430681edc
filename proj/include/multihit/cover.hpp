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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "multihit/bitmat.hpp"
#include "multihit/search.hpp"

namespace multihit {

// Produces the global argmax over the full lambda range of `m` against its
// current active tumor mask. Implementations: sequential search below, and
// the distributed scheduler in sched/runtime.hpp.
class ArgmaxExecutor {
 public:
  virtual ~ArgmaxExecutor() = default;
  virtual SearchResult argmax(const MutationMatrix& m, unsigned hits, double alpha) = 0;
};

class SequentialExecutor : public ArgmaxExecutor {
 public:
  explicit SequentialExecutor(bool prune = true) : prune_(prune) {}
  SearchResult argmax(const MutationMatrix& m, unsigned hits, double alpha) override;

 private:
  bool prune_;
};

struct CoverSolution {
  std::vector<ScoredCombination> rounds;
  std::vector<std::size_t> covered_history;  // newly covered tumors per round
  std::vector<SearchStats> round_stats;
  bool complete = false;
  std::string diagnostic;  // why the loop stopped early, empty when complete

  std::size_t covered_tumors() const;
};

struct CoverOptions {
  unsigned hits = 4;
  double alpha = 0.1;
  std::size_t max_rounds = 64;
};

// Greedy weighted set cover. `m` is taken by value: its active mask is
// consumed round by round.
CoverSolution greedy_cover(MutationMatrix m, const CoverOptions& options, ArgmaxExecutor& executor);

// One line per round: "(i1, i2, ..., ih)<TAB>F<TAB>newly_covered".
void write_solution(const CoverSolution& solution, std::ostream& out);
std::string format_combination(const Combination& combo);

}  // namespace multihit
