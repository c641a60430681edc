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

#include "multihit/cover.hpp"

#include <cstdio>
#include <ostream>

#include "multihit/error.hpp"

namespace multihit {

SearchResult SequentialExecutor::argmax(const MutationMatrix& m, unsigned hits, double alpha) {
  return pdfs_best(m, hits, {0, lambda_total(m.gene_count(), hits)}, alpha, prune_);
}

std::size_t CoverSolution::covered_tumors() const {
  std::size_t n = 0;
  for (auto c : covered_history) n += c;
  return n;
}

CoverSolution greedy_cover(MutationMatrix m, const CoverOptions& options, ArgmaxExecutor& executor) {
  if (m.num_tumor() == 0) throw UsageError("greedy_cover: matrix has no tumor samples");
  if (options.hits < 2) throw UsageError("greedy_cover: hits must be >= 2");
  if (!(options.alpha > 0)) throw UsageError("greedy_cover: alpha must be > 0");

  CoverSolution solution;
  while (m.active_tumor_count() > 0) {
    if (solution.rounds.size() >= options.max_rounds) {
      solution.diagnostic = "max_rounds (" + std::to_string(options.max_rounds) + ") reached with " +
                            std::to_string(m.active_tumor_count()) + " tumor samples uncovered";
      return solution;
    }
    auto result = executor.argmax(m, options.hits, options.alpha);
    solution.round_stats.push_back(result.stats);
    if (!result.best || result.best->true_positives == 0) {
      solution.diagnostic = "stalled: no " + std::to_string(options.hits) +
                            "-hit combination covers any of the " +
                            std::to_string(m.active_tumor_count()) + " remaining tumor samples";
      return solution;
    }
    auto best = std::move(*result.best);
    // Executors that ship results over the wire drop the cover bits.
    if (best.tumor_cover.size() != m.num_tumor()) best = score(best.combo, m, options.alpha);
    const std::size_t newly = best.tumor_cover.count();
    m.clear_covered(best.tumor_cover);
    solution.covered_history.push_back(newly);
    solution.rounds.push_back(std::move(best));
  }
  solution.complete = true;
  return solution;
}

std::string format_combination(const Combination& combo) {
  std::string out = "(";
  for (std::size_t i = 0; i < combo.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(combo[i]);
  }
  out += ')';
  return out;
}

void write_solution(const CoverSolution& solution, std::ostream& out) {
  for (std::size_t r = 0; r < solution.rounds.size(); ++r) {
    char score[32];
    std::snprintf(score, sizeof score, "%.12f", solution.rounds[r].score);
    out << format_combination(solution.rounds[r].combo) << '\t' << score << '\t'
        << solution.covered_history[r] << '\n';
  }
}

}  // namespace multihit
