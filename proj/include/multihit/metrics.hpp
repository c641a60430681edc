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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "multihit/bitmat.hpp"
#include "multihit/ingest.hpp"

namespace multihit {

// Per-worker counters for one round. Busy time covers only the search calls
// themselves; idle is the rest of the worker's lifetime in the round.
// Steal counters belong to the worker's leader and are reported on the
// group's first worker row so column sums stay exact.
struct RunMetrics {
  std::uint32_t worker_id = 0;
  double busy_seconds = 0.0;
  double idle_seconds = 0.0;
  std::uint64_t chunks_processed = 0;
  std::uint64_t visited = 0;
  std::uint64_t pruned_combinations = 0;
  std::uint64_t steals_initiated = 0;
  std::uint64_t steals_served = 0;
};

struct MetricsSummary {
  std::size_t workers = 0;
  double busy_min = 0.0;
  double busy_max = 0.0;
  double busy_mean = 0.0;
  double busy_stddev = 0.0;  // population
  double idle_fraction_mean = 0.0;
  std::uint64_t total_visited = 0;
  std::uint64_t total_pruned = 0;
  std::string search_space;  // C(G, h), exact decimal
  double visited_fraction = 0.0;
};

// Throws UsageError on an empty list.
MetricsSummary summarize(std::span<const RunMetrics> all, std::size_t genes, unsigned hits);

// Exact C(n, k) in decimal.
std::string big_binomial(std::uint64_t n, std::uint64_t k);

// CSV with a fixed header; one row per worker per round.
void write_metrics_header(std::ostream& out);
void write_metrics_rows(std::ostream& out, std::size_t round, std::span<const RunMetrics> rows);

struct CoverageReport {
  std::size_t tumors = 0;
  std::size_t normals = 0;
  std::size_t covered_tumors = 0;
  std::size_t covered_normals = 0;
  std::vector<std::string> uncovered_tumors;

  bool complete() const { return covered_tumors == tumors; }
};

struct SolutionLine {
  std::vector<std::string> genes;  // raw tokens inside the parentheses
  std::string rest;                // everything after the closing parenthesis
};

// Parses "(a, b, c)<rest>" lines; blank lines are skipped.
std::vector<SolutionLine> read_solution(std::istream& in);

// Recomputes coverage from the raw intermediates: a sample is covered by a
// combination when every gene of it lists the sample. Tokens are resolved
// through the gene map. Throws FormatError naming the line of an unknown
// index.
CoverageReport verify_cover(std::istream& solution, const CohortIntermediate& cohort,
                            const GeneMap& genes);

// Replaces indices by names. Throws ConfigError listing every missing index.
void convert_indices(std::istream& solution, const GeneMap& genes, std::ostream& out);

}  // namespace multihit
