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

#include <gtest/gtest.h>

#include <random>

#include "multihit/error.hpp"
#include "oracles.hpp"

namespace multihit {
namespace {

using testing::DenseMatrix;

DenseMatrix two_by_two() {
  // Genes 0,1 mutated in both tumors and no normal; gene 2 only in normals.
  DenseMatrix d;
  d.num_tumor = 2;
  d.num_normal = 2;
  d.bits = {{true, true, false, false}, {true, true, false, false}, {false, false, true, true}};
  d.active = {true, true};
  return d;
}

TEST(Score, FormulaExamples) {
  const auto m = testing::to_matrix(two_by_two());
  const auto s = score({0, 1}, m, 0.1);
  EXPECT_DOUBLE_EQ(s.score, 0.55);
  EXPECT_EQ(s.true_positives, 2u);
  EXPECT_EQ(s.true_negatives, 2u);
  EXPECT_EQ(s.tumor_cover.count(), 2u);

  // Covers no tumor and every normal carries gene 2.
  const auto z = score({1, 2}, m, 0.1);
  EXPECT_EQ(z.score, 0.0);
}

TEST(Score, DenominatorUsesActiveTumors) {
  auto d = two_by_two();
  d.active = {true, false};
  const auto s = score({0, 1}, testing::to_matrix(d), 0.1);
  EXPECT_EQ(s.true_positives, 1u);
  EXPECT_DOUBLE_EQ(s.score, (0.1 * 1 + 2) / 3.0);
}

TEST(Score, MatchesCountingOracle) {
  std::mt19937_64 rng(3);
  auto d = testing::random_dense(rng, 8, 6, 4, 0.4);
  d.active[2] = false;
  const auto m = testing::to_matrix(d);
  testing::for_each_combination(8, 3, [&](const auto& c) {
    const auto expect = testing::oracle_score(d, c, 0.1);
    const auto got = score(c, m, 0.1);
    EXPECT_EQ(got.true_positives, expect.tp);
    EXPECT_EQ(got.true_negatives, expect.tn);
    EXPECT_EQ(got.score, expect.score);
  });
}

TEST(Score, RejectsInvalidCombination) {
  const auto m = testing::to_matrix(two_by_two());
  EXPECT_THROW(score({1, 0}, m, 0.1), UsageError);
  EXPECT_THROW(score({0, 3}, m, 0.1), UsageError);
}

TEST(Lambda, TotalsAndDecode) {
  EXPECT_EQ(lambda_total(5, 2), 10u);
  EXPECT_EQ(lambda_decode(0, 5, 2), std::make_pair(GeneIndex{0}, GeneIndex{1}));
  EXPECT_EQ(lambda_decode(4, 5, 2), std::make_pair(GeneIndex{1}, GeneIndex{2}));
  EXPECT_EQ(lambda_decode(9, 5, 2), std::make_pair(GeneIndex{3}, GeneIndex{4}));
  EXPECT_EQ(lambda_total(20, 4), 153u);  // C(18, 2)
  EXPECT_EQ(lambda_total(3, 4), 0u);
  EXPECT_THROW(lambda_decode(10, 5, 2), UsageError);
  EXPECT_THROW(lambda_total(5, 1), UsageError);
}

TEST(Lambda, DecodeInvertsLexicographicEnumeration) {
  for (unsigned h : {2u, 3u, 4u, 9u}) {
    const std::size_t G = 20;
    std::uint64_t lam = 0;
    for (GeneIndex g1 = 0; g1 + h <= G; ++g1) {
      for (GeneIndex g2 = g1 + 1; g2 + h <= G + 1; ++g2, ++lam) {
        ASSERT_EQ(lambda_decode(lam, G, h), std::make_pair(g1, g2));
        ASSERT_EQ(lambda_encode(g1, g2, G, h), lam);
      }
    }
    EXPECT_EQ(lam, lambda_total(G, h));
  }
}

TEST(Binomial, ExactAndOverflow) {
  EXPECT_EQ(binomial(20, 3), 1140u);
  EXPECT_EQ(binomial(5, 7), 0u);
  EXPECT_EQ(binomial(67, 33), 14226520737620288370ULL);
  EXPECT_THROW(binomial(20000, 9), UsageError);
}

TEST(Pdfs, AllZeroMatrixPrunesEverything) {
  DenseMatrix d;
  d.num_tumor = 5;
  d.num_normal = 3;
  d.bits.assign(10, std::vector<bool>(8, false));
  d.active.assign(5, true);
  const auto m = testing::to_matrix(d);
  const auto total = lambda_total(10, 3);
  const auto r = pdfs_best(m, 3, {0, total}, 0.1, true);
  EXPECT_FALSE(r.best);
  EXPECT_EQ(r.stats.visited, 0u);
  EXPECT_EQ(r.stats.pruned_combinations, binomial(10, 3));

  const auto ex = pdfs_best(m, 3, {0, total}, 0.1, false);
  EXPECT_FALSE(ex.best);
  EXPECT_EQ(ex.stats.visited, binomial(10, 3));
}

TEST(Pdfs, DisjointRowsVisitNothing) {
  DenseMatrix d;
  d.num_tumor = 6;
  d.num_normal = 0;
  d.bits.assign(6, std::vector<bool>(6, false));
  for (std::size_t i = 0; i < 6; ++i) d.bits[i][i] = true;
  d.active.assign(6, true);
  const auto r = pdfs_best(testing::to_matrix(d), 2, {0, lambda_total(6, 2)}, 0.1, true);
  EXPECT_EQ(r.stats.visited, 0u);
  EXPECT_EQ(r.stats.pruned_subtrees, 15u);
  EXPECT_FALSE(r.best);
}

TEST(Pdfs, EmptyIntervalAndRangeErrors) {
  const auto m = testing::to_matrix(two_by_two());
  const auto r = pdfs_best(m, 2, {1, 1}, 0.1, true);
  EXPECT_FALSE(r.best);
  EXPECT_EQ(r.stats, SearchStats{});
  EXPECT_THROW(pdfs_best(m, 2, {0, 4}, 0.1, true), UsageError);
}

TEST(Pdfs, PrunedMatchesExhaustiveOnSparse15x12) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 40; ++trial) {
    auto d = testing::random_dense(rng, 15, 8, 4, 0.3);
    const auto m = testing::to_matrix(d);
    const LambdaInterval all{0, lambda_total(15, 3)};
    const auto pruned = pdfs_best(m, 3, all, 0.1, true);
    const auto full = pdfs_best(m, 3, all, 0.1, false);
    const auto oracle = testing::exhaustive_argmax(d, 3, 0.1);
    ASSERT_EQ(pruned.best.has_value(), oracle.has_value());
    if (oracle) {
      EXPECT_EQ(pruned.best->combo, oracle->combo);
      EXPECT_EQ(pruned.best->score, oracle->score);
      EXPECT_EQ(full.best->combo, oracle->combo);
      EXPECT_EQ(pruned.best->true_positives, oracle->tp);
    }
    EXPECT_LE(pruned.stats.visited, full.stats.visited);
    EXPECT_EQ(full.stats.visited, binomial(15, 3));
    EXPECT_EQ(pruned.stats.visited + pruned.stats.pruned_combinations, binomial(15, 3));
  }
}

TEST(Pdfs, TieBreakPrefersLexicographicallySmallest) {
  // Every pair covers the single tumor equally; (0, 1) must win.
  DenseMatrix d;
  d.num_tumor = 1;
  d.num_normal = 0;
  d.bits.assign(5, std::vector<bool>{true});
  d.active = {true};
  const auto m = testing::to_matrix(d);
  const auto r = pdfs_best(m, 2, {0, lambda_total(5, 2)}, 0.1, true);
  ASSERT_TRUE(r.best);
  EXPECT_EQ(r.best->combo, (Combination{0, 1}));
  const auto tail = pdfs_best(m, 2, {3, 10}, 0.1, true);
  EXPECT_EQ(tail.best->combo, (Combination{0, 4}));
}

TEST(Pdfs, ConservationMatchesEnumeratedSubtrees) {
  std::mt19937_64 rng(21);
  for (unsigned h : {2u, 3u, 4u}) {
    const std::size_t G = 11;
    const auto d = testing::random_dense(rng, G, 10, 3, 0.35);
    const auto m = testing::to_matrix(d);
    const auto total = lambda_total(G, h);
    for (int trial = 0; trial < 10; ++trial) {
      auto a = rng() % (total + 1);
      auto b = rng() % (total + 1);
      if (a > b) std::swap(a, b);
      const auto r = pdfs_best(m, h, {a, b}, 0.1, true);
      const auto expect = testing::enumerated_subtree_total(G, h, a, b);
      EXPECT_EQ(r.stats.visited + r.stats.pruned_combinations, expect);
      EXPECT_EQ(combinations_in({a, b}, G, h), expect);
    }
  }
}

TEST(Pdfs, PartitionAdditivity) {
  std::mt19937_64 rng(5);
  const auto d = testing::random_dense(rng, 18, 16, 6, 0.25);
  const auto m = testing::to_matrix(d);
  const unsigned h = 3;
  const auto total = lambda_total(18, h);
  const auto whole = pdfs_best(m, h, {0, total}, 0.1, true);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint64_t> cuts{0, total};
    for (int k = 0; k < 4; ++k) cuts.push_back(rng() % total);
    std::sort(cuts.begin(), cuts.end());
    std::optional<ScoredCombination> folded;
    SearchStats sum;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      auto part = pdfs_best(m, h, {cuts[i], cuts[i + 1]}, 0.1, true);
      fold_best(folded, part.best);
      sum += part.stats;
    }
    ASSERT_TRUE(folded);
    EXPECT_EQ(folded->combo, whole.best->combo);
    EXPECT_EQ(folded->score, whole.best->score);
    EXPECT_EQ(sum.visited, whole.stats.visited);
    EXPECT_EQ(sum.pruned_combinations, whole.stats.pruned_combinations);
  }
}

TEST(Pdfs, MaskedSamplesAreInvisible) {
  std::mt19937_64 rng(8);
  auto d = testing::random_dense(rng, 12, 14, 5, 0.35);
  for (std::size_t s = 0; s < 14; s += 3) d.active[s] = false;
  const auto m = testing::to_matrix(d);
  for (unsigned h : {2u, 3u}) {
    const auto r = pdfs_best(m, h, {0, lambda_total(12, h)}, 0.1, true);
    const auto oracle = testing::exhaustive_argmax(d, h, 0.1);
    ASSERT_EQ(r.best.has_value(), oracle.has_value());
    if (oracle) {
      EXPECT_EQ(r.best->combo, oracle->combo);
      EXPECT_EQ(r.best->score, oracle->score);
      for (std::size_t s = 0; s < 14; ++s) {
        if (!d.active[s]) EXPECT_FALSE(r.best->tumor_cover.test(s));
      }
    }
  }
}

TEST(Pdfs, DeepHitsMatchOracle) {
  std::mt19937_64 rng(9);
  auto d = testing::random_dense(rng, 13, 10, 4, 0.8);
  const auto m = testing::to_matrix(d);
  for (unsigned h : {7u, 9u}) {
    const auto r = pdfs_best(m, h, {0, lambda_total(13, h)}, 0.1, true);
    const auto oracle = testing::exhaustive_argmax(d, h, 0.1);
    ASSERT_EQ(r.best.has_value(), oracle.has_value());
    if (oracle) EXPECT_EQ(r.best->combo, oracle->combo);
    EXPECT_EQ(r.stats.visited + r.stats.pruned_combinations, binomial(13, h));
  }
}

TEST(Pdfs, VisitedFractionFallsWithHits) {
  std::mt19937_64 rng(12);
  double prev = 1.0;
  for (unsigned h : {2u, 3u, 4u}) {
    double sum = 0;
    for (int trial = 0; trial < 5; ++trial) {
      const auto d = testing::sparsity_sorted(testing::random_dense(rng, 40, 64, 16, 0.1));
      const auto r = pdfs_best(testing::to_matrix(d), h, {0, lambda_total(40, h)}, 0.1, true);
      sum += static_cast<double>(r.stats.visited) / static_cast<double>(binomial(40, h));
    }
    EXPECT_LT(sum / 5, prev) << "h=" << h;
    prev = sum / 5;
  }
}

}  // namespace
}  // namespace multihit
