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

#include "multihit/metrics.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "multihit/error.hpp"

namespace multihit {
namespace {

RunMetrics row(double busy, double idle, std::uint64_t visited = 0) {
  RunMetrics r;
  r.busy_seconds = busy;
  r.idle_seconds = idle;
  r.visited = visited;
  return r;
}

TEST(Summarize, SingleWorkerHasZeroSpread) {
  const std::vector<RunMetrics> rows{row(2.5, 0.5)};
  const auto s = summarize(rows, 10, 2);
  EXPECT_EQ(s.busy_stddev, 0.0);
  EXPECT_EQ(s.busy_min, 2.5);
  EXPECT_EQ(s.busy_max, 2.5);
  EXPECT_DOUBLE_EQ(s.idle_fraction_mean, 0.5 / 3.0);
}

TEST(Summarize, PopulationStddev) {
  const std::vector<RunMetrics> rows{row(1, 0), row(3, 1)};
  const auto s = summarize(rows, 10, 2);
  EXPECT_DOUBLE_EQ(s.busy_mean, 2.0);
  EXPECT_DOUBLE_EQ(s.busy_stddev, 1.0);
  EXPECT_DOUBLE_EQ(s.idle_fraction_mean, (0.0 + 0.25) / 2);
}

TEST(Summarize, VisitedFraction) {
  const std::vector<RunMetrics> rows{row(0, 0, 4), row(0, 0, 6)};
  const auto s = summarize(rows, 20, 3);
  EXPECT_EQ(s.search_space, "1140");
  EXPECT_EQ(s.total_visited, 10u);
  EXPECT_DOUBLE_EQ(s.visited_fraction, 10.0 / 1140.0);
  EXPECT_THROW(summarize(std::span<const RunMetrics>{}, 20, 3), UsageError);
}

TEST(Summarize, HugeSearchSpaceIsExact) {
  EXPECT_EQ(big_binomial(20000, 9), "1408396986854518920953221307780000");
  EXPECT_EQ(big_binomial(5, 7), "0");
}

TEST(MetricsCsv, HeaderAndRow) {
  std::ostringstream out;
  write_metrics_header(out);
  RunMetrics r = row(1.5, 0.25, 7);
  r.worker_id = 3;
  r.chunks_processed = 2;
  r.pruned_combinations = 9;
  r.steals_initiated = 1;
  const std::vector<RunMetrics> rows{r};
  write_metrics_rows(out, 4, rows);
  std::istringstream in(out.str());
  std::string header;
  std::string line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header,
            "round,worker_id,busy_seconds,idle_seconds,chunks_processed,visited,pruned_combinations,"
            "steals_initiated,steals_served");
  EXPECT_EQ(line.substr(0, 4), "4,3,");
  EXPECT_NE(line.find(",2,7,9,1,0"), std::string::npos);
}

CohortIntermediate tiny_cohort() {
  CohortIntermediate c;
  c.tumor_samples = {"t1", "t2"};
  c.normal_samples = {"n1"};
  c.gene_to_samples["A"] = {"t1", "t2"};
  c.gene_to_samples["B"] = {"t1", "t2", "n1"};
  c.gene_to_samples["C"] = {"t2"};
  return c;
}

TEST(VerifyCover, FullCover) {
  std::istringstream sol("(0, 1)\t0.5\t2\n");
  const auto r = verify_cover(sol, tiny_cohort(), GeneMap({"A", "B", "C"}));
  EXPECT_TRUE(r.complete());
  EXPECT_EQ(r.covered_tumors, 2u);
  EXPECT_EQ(r.covered_normals, 0u);
}

TEST(VerifyCover, PartialCoverListsMissingTumors) {
  std::istringstream sol("(2, 1)\n\n");
  const auto r = verify_cover(sol, tiny_cohort(), GeneMap({"A", "B", "C"}));
  EXPECT_FALSE(r.complete());
  EXPECT_EQ(r.uncovered_tumors, (std::vector<std::string>{"t1"}));
}

TEST(VerifyCover, UnknownIndexNamesLine) {
  std::istringstream sol("(0, 1)\n(0, 7)\n");
  try {
    verify_cover(sol, tiny_cohort(), GeneMap({"A", "B", "C"}));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 2u);
    EXPECT_NE(std::string(e.what()).find("'7'"), std::string::npos);
  }
}

TEST(Convert, ReplacesIndices) {
  std::istringstream sol("(2, 0)\t0.3\t1\n");
  std::ostringstream out;
  convert_indices(sol, GeneMap({"TP53", "KRAS", "EGFR"}), out);
  EXPECT_EQ(out.str(), "(EGFR, TP53)\t0.3\t1\n");
}

TEST(Convert, Errors) {
  std::istringstream missing("(0, 5)\n(9, 1)\n");
  std::ostringstream out;
  try {
    convert_indices(missing, GeneMap({"A", "B"}), out);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("5, 9"), std::string::npos);
  }
  EXPECT_TRUE(out.str().empty());
  std::istringstream word("(0, x)\n");
  EXPECT_THROW(convert_indices(word, GeneMap({"A"}), out), FormatError);
  std::istringstream no_paren("0, 1\n");
  EXPECT_THROW(convert_indices(no_paren, GeneMap({"A", "B"}), out), FormatError);
}

}  // namespace
}  // namespace multihit
