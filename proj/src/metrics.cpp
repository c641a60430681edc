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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "multihit/error.hpp"

namespace multihit {

namespace {

boost::multiprecision::cpp_int exact_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  boost::multiprecision::cpp_int c = 1;
  for (std::uint64_t i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<GeneIndex> parse_index(const std::string& token) {
  if (token.empty() || !std::all_of(token.begin(), token.end(), ::isdigit)) return std::nullopt;
  try {
    const auto v = std::stoull(token);
    if (v > std::numeric_limits<GeneIndex>::max()) return std::nullopt;
    return static_cast<GeneIndex>(v);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

}  // namespace

std::string big_binomial(std::uint64_t n, std::uint64_t k) { return exact_binomial(n, k).str(); }

MetricsSummary summarize(std::span<const RunMetrics> all, std::size_t genes, unsigned hits) {
  if (all.empty()) throw UsageError("summarize: no metrics rows");
  MetricsSummary s;
  s.workers = all.size();
  s.busy_min = all.front().busy_seconds;
  s.busy_max = all.front().busy_seconds;
  double sum = 0.0;
  double idle_sum = 0.0;
  for (const auto& r : all) {
    s.busy_min = std::min(s.busy_min, r.busy_seconds);
    s.busy_max = std::max(s.busy_max, r.busy_seconds);
    sum += r.busy_seconds;
    const double life = r.busy_seconds + r.idle_seconds;
    idle_sum += life > 0 ? r.idle_seconds / life : 0.0;
    s.total_visited += r.visited;
    s.total_pruned += r.pruned_combinations;
  }
  s.busy_mean = sum / static_cast<double>(all.size());
  double var = 0.0;
  for (const auto& r : all) var += (r.busy_seconds - s.busy_mean) * (r.busy_seconds - s.busy_mean);
  s.busy_stddev = std::sqrt(var / static_cast<double>(all.size()));
  s.idle_fraction_mean = idle_sum / static_cast<double>(all.size());

  const auto space = exact_binomial(genes, hits);
  s.search_space = space.str();
  if (space > 0) {
    using Dec = boost::multiprecision::cpp_dec_float_50;
    s.visited_fraction = static_cast<double>(Dec(s.total_visited) / Dec(space));
  }
  return s;
}

void write_metrics_header(std::ostream& out) {
  out << "round,worker_id,busy_seconds,idle_seconds,chunks_processed,visited,pruned_combinations,"
         "steals_initiated,steals_served\n";
}

void write_metrics_rows(std::ostream& out, std::size_t round, std::span<const RunMetrics> rows) {
  for (const auto& r : rows) {
    out << round << ',' << r.worker_id << ',' << fixed(r.busy_seconds) << ',' << fixed(r.idle_seconds)
        << ',' << r.chunks_processed << ',' << r.visited << ',' << r.pruned_combinations << ','
        << r.steals_initiated << ',' << r.steals_served << '\n';
  }
}

std::vector<SolutionLine> read_solution(std::istream& in) {
  std::vector<SolutionLine> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto open = line.find('(');
    const auto close = line.find(')');
    if (open != 0 || close == std::string::npos) {
      throw FormatError("solution: expected '(g1, ..., gh)' at start of line", lineno);
    }
    SolutionLine sl;
    const std::string_view inner = std::string_view(line).substr(1, close - 1);
    std::size_t start = 0;
    while (start <= inner.size()) {
      const auto comma = inner.find(',', start);
      const auto token = trim(inner.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                  : comma - start));
      if (token.empty()) throw FormatError("solution: empty gene token", lineno);
      sl.genes.push_back(token);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    sl.rest = line.substr(close + 1);
    lines.push_back(std::move(sl));
  }
  return lines;
}

CoverageReport verify_cover(std::istream& solution, const CohortIntermediate& cohort,
                            const GeneMap& genes) {
  const auto lines = read_solution(solution);
  std::vector<std::vector<const std::set<std::string>*>> combos;
  static const std::set<std::string> kNone;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<const std::set<std::string>*> sets;
    for (const auto& token : lines[i].genes) {
      const auto idx = parse_index(token);
      if (!idx || *idx >= genes.size()) {
        throw FormatError("solution: unknown gene index '" + token + "' on combination " +
                              std::to_string(i + 1),
                          i + 1);
      }
      const auto it = cohort.gene_to_samples.find(genes.lookup(*idx));
      sets.push_back(it == cohort.gene_to_samples.end() ? &kNone : &it->second);
    }
    combos.push_back(std::move(sets));
  }
  auto covered = [&](const std::string& sample) {
    return std::any_of(combos.begin(), combos.end(), [&](const auto& sets) {
      return std::all_of(sets.begin(), sets.end(), [&](const auto* s) { return s->contains(sample); });
    });
  };

  CoverageReport report;
  report.tumors = cohort.tumor_samples.size();
  report.normals = cohort.normal_samples.size();
  for (const auto& s : cohort.tumor_samples) {
    if (covered(s)) {
      ++report.covered_tumors;
    } else {
      report.uncovered_tumors.push_back(s);
    }
  }
  for (const auto& s : cohort.normal_samples) {
    if (covered(s)) ++report.covered_normals;
  }
  return report;
}

void convert_indices(std::istream& solution, const GeneMap& genes, std::ostream& out) {
  const auto lines = read_solution(solution);
  std::set<std::string> missing;
  for (const auto& l : lines) {
    for (const auto& token : l.genes) {
      const auto idx = parse_index(token);
      if (!idx) throw FormatError("convert: non-integer gene token '" + token + "'", 0);
      if (*idx >= genes.size()) missing.insert(token);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("convert: indices missing from gene map: " + list);
  }
  for (const auto& l : lines) {
    out << '(';
    for (std::size_t i = 0; i < l.genes.size(); ++i) {
      if (i > 0) out << ", ";
      out << genes.lookup(*parse_index(l.genes[i]));
    }
    out << ')' << l.rest << '\n';
  }
}

}  // namespace multihit
