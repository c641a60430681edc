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

#include <compare>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "multihit/bitmat.hpp"

namespace multihit {

// Strictly increasing gene indices.
using Combination = std::vector<GeneIndex>;

struct ScoredCombination {
  Combination combo;
  double score = 0.0;
  std::uint32_t true_positives = 0;  // T+: active tumors with every gene mutated
  std::uint32_t true_negatives = 0;  // T-: normals with none of the genes mutated
  BitRow tumor_cover;                // over tumor columns, restricted to the active mask
};

// Global argmax order: higher score first, then the lexicographically smaller
// tuple. Every reduction in the project folds with this relation, which makes
// results independent of how the lambda range is partitioned.
bool better(const ScoredCombination& a, const ScoredCombination& b);
void fold_best(std::optional<ScoredCombination>& acc, std::optional<ScoredCombination> candidate);

// F = (alpha * T+ + T-) / (active tumors + normals).
double weight(std::uint32_t true_positives, std::uint32_t true_negatives, std::size_t active_tumors,
              std::size_t num_normal, double alpha);

ScoredCombination score(const Combination& combo, const MutationMatrix& m, double alpha);

struct LambdaInterval {
  std::uint64_t start = 0;
  std::uint64_t end = 0;  // exclusive

  std::uint64_t size() const { return end - start; }
  bool empty() const { return start >= end; }
  friend bool operator==(const LambdaInterval&, const LambdaInterval&) = default;
};

// Pairs (g1, g2) with 0 <= g1 < g2 <= G-h+1, numbered lexicographically.
// Only pairs that can still be extended to h genes are enumerated.
std::uint64_t lambda_total(std::size_t genes, unsigned hits);
std::pair<GeneIndex, GeneIndex> lambda_decode(std::uint64_t lam, std::size_t genes, unsigned hits);
std::uint64_t lambda_encode(GeneIndex g1, GeneIndex g2, std::size_t genes, unsigned hits);

// Exact C(n, k); throws UsageError on uint64 overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

struct SearchStats {
  std::uint64_t visited = 0;              // depth-h combinations scored
  std::uint64_t pruned_subtrees = 0;      // backtrack events
  std::uint64_t pruned_combinations = 0;  // depth-h combinations skipped by those backtracks

  SearchStats& operator+=(const SearchStats& o) {
    visited += o.visited;
    pruned_subtrees += o.pruned_subtrees;
    pruned_combinations += o.pruned_combinations;
    return *this;
  }
  friend bool operator==(const SearchStats&, const SearchStats&) = default;
};

// Number of depth-h combinations under the lambda pairs in `interval`.
std::uint64_t combinations_in(const LambdaInterval& interval, std::size_t genes, unsigned hits);

// Snapshot of a matrix for one greedy round: tumor words pre-masked with the
// active mask and normal words realigned to bit 0. Read-only, shareable.
class SearchView {
 public:
  SearchView(const MutationMatrix& m, unsigned hits);

  std::size_t gene_count() const { return genes_; }
  unsigned hits() const { return hits_; }
  std::size_t active_tumors() const { return active_tumors_; }
  std::size_t num_tumor() const { return num_tumor_; }
  std::size_t num_normal() const { return num_normal_; }
  std::size_t tumor_words() const { return tumor_words_; }
  std::size_t normal_words() const { return normal_words_; }

  const std::uint64_t* tumor_row(GeneIndex g) const { return &tumor_[g * tumor_words_]; }
  const std::uint64_t* normal_row(GeneIndex g) const { return &normal_[g * normal_words_]; }
  // C(n, k) for n <= G, k <= h.
  std::uint64_t choose(std::size_t n, std::size_t k) const { return binom_[n * (hits_ + 1) + k]; }

 private:
  std::size_t genes_;
  unsigned hits_;
  std::size_t num_tumor_;
  std::size_t num_normal_;
  std::size_t active_tumors_;
  std::size_t tumor_words_;
  std::size_t normal_words_;
  std::vector<std::uint64_t> tumor_;
  std::vector<std::uint64_t> normal_;
  std::vector<std::uint64_t> binom_;
};

struct SearchResult {
  std::optional<ScoredCombination> best;
  SearchStats stats;
};

// Depth-first argmax over every h-combination whose (g1, g2) prefix lies in
// `interval`. With `prune`, a branch is abandoned as soon as its running
// intersection has no active tumor bit; without it every combination is
// scored. Only combinations covering at least one active tumor are eligible
// for the argmax in either mode, so both modes return the same best.
SearchResult pdfs_best(const SearchView& view, LambdaInterval interval, double alpha, bool prune);
SearchResult pdfs_best(const MutationMatrix& m, unsigned hits, LambdaInterval interval, double alpha,
                       bool prune);

}  // namespace multihit
