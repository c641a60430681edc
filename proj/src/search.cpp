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

#include "multihit/search.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "multihit/error.hpp"

namespace multihit {

bool better(const ScoredCombination& a, const ScoredCombination& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.combo < b.combo;
}

void fold_best(std::optional<ScoredCombination>& acc, std::optional<ScoredCombination> candidate) {
  if (!candidate) return;
  if (!acc || better(*candidate, *acc)) acc = std::move(candidate);
}

double weight(std::uint32_t true_positives, std::uint32_t true_negatives, std::size_t active_tumors,
              std::size_t num_normal, double alpha) {
  const double denom = static_cast<double>(active_tumors + num_normal);
  return (alpha * true_positives + true_negatives) / denom;
}

ScoredCombination score(const Combination& combo, const MutationMatrix& m, double alpha) {
  if (combo.empty()) throw UsageError("score: empty combination");
  for (std::size_t i = 0; i < combo.size(); ++i) {
    if (combo[i] >= m.gene_count() || (i > 0 && combo[i] <= combo[i - 1])) {
      throw UsageError("score: combination must be strictly increasing and in range");
    }
  }
  BitRow all = m.row(combo[0]);
  BitRow any = m.row(combo[0]);
  for (std::size_t i = 1; i < combo.size(); ++i) {
    and_into(all, m.row(combo[i]));
    const auto& r = m.row(combo[i]);
    for (std::size_t s = m.num_tumor(); s < m.num_samples(); ++s) {
      if (r.test(s)) any.set(s);
    }
  }
  ScoredCombination out;
  out.combo = combo;
  out.tumor_cover = BitRow(m.num_tumor());
  const auto& mask = m.active_tumor_mask();
  for (std::size_t s = 0; s < m.num_tumor(); ++s) {
    if (all.test(s) && mask.test(s)) {
      out.tumor_cover.set(s);
      ++out.true_positives;
    }
  }
  for (std::size_t s = m.num_tumor(); s < m.num_samples(); ++s) {
    if (!any.test(s)) ++out.true_negatives;
  }
  out.score = weight(out.true_positives, out.true_negatives, m.active_tumor_count(), m.num_normal(),
                     alpha);
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    c = c * (n - i) / (i + 1);
    if (c > std::numeric_limits<std::uint64_t>::max()) {
      throw UsageError("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                       ") overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(c);
}

namespace {

// Size of the pair universe: g1 < g2 drawn from [0, G-h+2).
std::uint64_t pair_universe(std::size_t genes, unsigned hits) {
  if (hits < 2) throw UsageError("hits must be >= 2");
  if (genes < hits) return 0;
  return genes - hits + 2;
}

// Number of pairs whose first gene is < g1.
std::uint64_t pairs_before(std::uint64_t g1, std::uint64_t universe) {
  return g1 * (universe - 1) - g1 * (g1 - (g1 > 0 ? 1 : 0)) / 2;
}

}  // namespace

std::uint64_t lambda_total(std::size_t genes, unsigned hits) {
  const auto p = pair_universe(genes, hits);
  return p * (p - (p > 0 ? 1 : 0)) / 2;
}

std::pair<GeneIndex, GeneIndex> lambda_decode(std::uint64_t lam, std::size_t genes, unsigned hits) {
  const auto total = lambda_total(genes, hits);
  if (lam >= total) {
    throw UsageError("lambda_decode: " + std::to_string(lam) + " out of range [0, " +
                     std::to_string(total) + ")");
  }
  const auto p = pair_universe(genes, hits);
  // Largest g1 with pairs_before(g1) <= lam.
  std::uint64_t lo = 0;
  std::uint64_t hi = p - 2;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (pairs_before(mid, p) <= lam) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const auto g2 = lo + 1 + (lam - pairs_before(lo, p));
  return {static_cast<GeneIndex>(lo), static_cast<GeneIndex>(g2)};
}

std::uint64_t lambda_encode(GeneIndex g1, GeneIndex g2, std::size_t genes, unsigned hits) {
  const auto p = pair_universe(genes, hits);
  if (!(g1 < g2 && g2 < p)) throw UsageError("lambda_encode: pair out of range");
  return pairs_before(g1, p) + (g2 - g1 - 1);
}

std::uint64_t combinations_in(const LambdaInterval& interval, std::size_t genes, unsigned hits) {
  if (interval.empty()) return 0;
  const auto total = lambda_total(genes, hits);
  if (interval.end > total) throw UsageError("combinations_in: interval out of range");
  auto [g1, g2] = lambda_decode(interval.start, genes, hits);
  const auto p = pair_universe(genes, hits);
  std::uint64_t sum = 0;
  for (auto lam = interval.start; lam < interval.end; ++lam) {
    sum += binomial(genes - 1 - g2, hits - 2);
    if (++g2 >= p) {
      ++g1;
      g2 = g1 + 1;
    }
  }
  return sum;
}

SearchView::SearchView(const MutationMatrix& m, unsigned hits)
    : genes_(m.gene_count()),
      hits_(hits),
      num_tumor_(m.num_tumor()),
      num_normal_(m.num_normal()),
      active_tumors_(m.active_tumor_count()),
      tumor_words_(BitRow::words_for(m.num_tumor())),
      normal_words_(BitRow::words_for(m.num_normal())) {
  if (hits < 2) throw UsageError("hits must be >= 2");
  // Validates that C(G, h) fits in the 64-bit counters.
  binomial(genes_, hits_);

  const auto mask = m.active_tumor_mask().words();
  tumor_.assign(genes_ * tumor_words_, 0);
  normal_.assign(genes_ * normal_words_, 0);
  for (std::size_t g = 0; g < genes_; ++g) {
    const auto& row = m.row(static_cast<GeneIndex>(g));
    const auto words = row.words();
    for (std::size_t w = 0; w < tumor_words_; ++w) tumor_[g * tumor_words_ + w] = words[w] & mask[w];
    for (std::size_t s = 0; s < num_normal_; ++s) {
      const std::size_t bit = num_tumor_ + s;
      if ((words[bit / 64] >> (bit % 64)) & 1U) {
        normal_[g * normal_words_ + s / 64] |= std::uint64_t{1} << (s % 64);
      }
    }
  }

  binom_.assign((genes_ + 1) * (hits_ + 1), 0);
  for (std::size_t n = 0; n <= genes_; ++n) {
    for (std::size_t k = 0; k <= hits_; ++k) binom_[n * (hits_ + 1) + k] = binomial(n, k);
  }
}

namespace {

class DepthFirstSearch {
 public:
  DepthFirstSearch(const SearchView& view, double alpha, bool prune)
      : v_(view),
        alpha_(alpha),
        prune_(prune),
        h_(view.hits()),
        tw_(view.tumor_words()),
        nw_(view.normal_words()),
        genes_(h_),
        tumor_(static_cast<std::size_t>(h_ + 1) * tw_),
        normal_(static_cast<std::size_t>(h_ + 1) * nw_) {}

  SearchResult run(LambdaInterval interval) {
    if (interval.empty()) return {};
    const auto universe = v_.gene_count() - h_ + 2;
    auto [g1, g2] = lambda_decode(interval.start, v_.gene_count(), h_);
    for (auto lam = interval.start; lam < interval.end; ++lam) {
      genes_[0] = g1;
      genes_[1] = g2;
      expand_pair();
      if (++g2 >= universe) {
        ++g1;
        g2 = g1 + 1;
      }
    }
    return {std::move(best_), stats_};
  }

 private:
  std::uint64_t* tumor_level(unsigned depth) { return &tumor_[depth * tw_]; }
  std::uint64_t* normal_level(unsigned depth) { return &normal_[depth * nw_]; }

  // Fills level `depth` (number of genes chosen) from level depth-1 and gene g.
  // Returns true iff the tumor intersection is empty.
  bool extend(unsigned depth, GeneIndex g) {
    const std::uint64_t* tprev = tumor_level(depth - 1);
    const std::uint64_t* nprev = normal_level(depth - 1);
    const std::uint64_t* trow = v_.tumor_row(g);
    const std::uint64_t* nrow = v_.normal_row(g);
    std::uint64_t* tcur = tumor_level(depth);
    std::uint64_t* ncur = normal_level(depth);
    std::uint64_t any = 0;
    for (std::size_t w = 0; w < tw_; ++w) {
      tcur[w] = tprev[w] & trow[w];
      any |= tcur[w];
    }
    for (std::size_t w = 0; w < nw_; ++w) ncur[w] = nprev[w] | nrow[w];
    return any == 0;
  }

  void expand_pair() {
    const GeneIndex g1 = genes_[0];
    std::copy_n(v_.tumor_row(g1), tw_, tumor_level(1));
    std::copy_n(v_.normal_row(g1), nw_, normal_level(1));
    const bool empty = extend(2, genes_[1]);
    if (empty && prune_) {
      ++stats_.pruned_subtrees;
      stats_.pruned_combinations += v_.choose(v_.gene_count() - 1 - genes_[1], h_ - 2);
      return;
    }
    if (h_ == 2) {
      leaf(empty);
      return;
    }

    // Explicit-stack DFS over positions 2..h-1. Position d holds gene genes_[d];
    // level d+1 holds the running intersection including it.
    const auto G = v_.gene_count();
    unsigned d = 2;
    genes_[d] = genes_[d - 1];
    while (d >= 2) {
      const std::size_t limit = G - h_ + d;
      if (++genes_[d] > limit) {
        --d;
        continue;
      }
      const bool sub_empty = extend(d + 1, genes_[d]);
      if (sub_empty && prune_) {
        ++stats_.pruned_subtrees;
        stats_.pruned_combinations += v_.choose(G - 1 - genes_[d], h_ - 1 - d);
        continue;
      }
      if (d + 1 == h_) {
        leaf(sub_empty);
        continue;
      }
      ++d;
      genes_[d] = genes_[d - 1];
    }
  }

  void leaf(bool empty) {
    ++stats_.visited;
    if (empty) return;
    const std::uint64_t* t = tumor_level(h_);
    const std::uint64_t* n = normal_level(h_);
    std::uint32_t tp = 0;
    std::uint32_t mutated_normals = 0;
    for (std::size_t w = 0; w < tw_; ++w) tp += std::popcount(t[w]);
    for (std::size_t w = 0; w < nw_; ++w) mutated_normals += std::popcount(n[w]);
    const auto tn = static_cast<std::uint32_t>(v_.num_normal()) - mutated_normals;
    const double f = weight(tp, tn, v_.active_tumors(), v_.num_normal(), alpha_);
    // Enumeration is lexicographic, so a strictly greater score is the only
    // way a later combination can win.
    if (best_ && f <= best_->score) return;
    if (!best_) best_.emplace();
    best_->combo.assign(genes_.begin(), genes_.end());
    best_->score = f;
    best_->true_positives = tp;
    best_->true_negatives = tn;
    best_->tumor_cover = BitRow(v_.num_tumor());
    best_->tumor_cover.assign_words(std::span<const std::uint64_t>(t, tw_));
  }

  const SearchView& v_;
  double alpha_;
  bool prune_;
  unsigned h_;
  std::size_t tw_;
  std::size_t nw_;
  std::vector<GeneIndex> genes_;
  std::vector<std::uint64_t> tumor_;
  std::vector<std::uint64_t> normal_;
  std::optional<ScoredCombination> best_;
  SearchStats stats_;
};

}  // namespace

SearchResult pdfs_best(const SearchView& view, LambdaInterval interval, double alpha, bool prune) {
  if (interval.start > interval.end || interval.end > lambda_total(view.gene_count(), view.hits())) {
    throw UsageError("pdfs_best: interval out of range");
  }
  return DepthFirstSearch(view, alpha, prune).run(interval);
}

SearchResult pdfs_best(const MutationMatrix& m, unsigned hits, LambdaInterval interval, double alpha,
                       bool prune) {
  return pdfs_best(SearchView(m, hits), interval, alpha, prune);
}

}  // namespace multihit
