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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Reference values come from the oracles in oracles.hpp.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "multihit/bitmat.hpp"
#include "multihit/cover.hpp"
#include "multihit/ingest.hpp"
#include "multihit/metrics.hpp"
#include "multihit/sched/protocol.hpp"
#include "multihit/sched/runtime.hpp"
#include "multihit/sched/sim.hpp"
#include "multihit/sched/transport.hpp"
#include "oracles.hpp"

namespace {

using namespace multihit;
using multihit::testing::DenseMatrix;

// Independent exact binomial for the conservation check.
unsigned __int128 choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

struct Conservation {
  std::size_t runs = 0;
  std::size_t violations = 0;

  void check(const SearchStats& s, std::size_t genes, unsigned hits) {
    ++runs;
    if (static_cast<unsigned __int128>(s.visited) + s.pruned_combinations != choose(genes, hits)) ++violations;
  }
};

Conservation g_conservation;

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_best(const std::optional<ScoredCombination>& a, const std::optional<ScoredCombination>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->combo == b->combo && same_bits(a->score, b->score));
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Runs pruned and unpruned search on the same round and records any
// disagreement; the pruned result drives the cover.
class ComparingExecutor : public ArgmaxExecutor {
 public:
  SearchResult argmax(const MutationMatrix& m, unsigned hits, double alpha) override {
    const LambdaInterval all{0, lambda_total(m.gene_count(), hits)};
    auto pruned = pdfs_best(m, hits, all, alpha, true);
    const auto full = pdfs_best(m, hits, all, alpha, false);
    g_conservation.check(pruned.stats, m.gene_count(), hits);
    g_conservation.check(full.stats, m.gene_count(), hits);
    ++rounds;
    if (!same_best(pruned.best, full.best)) ++mismatches;
    return pruned;
  }

  std::size_t rounds = 0;
  std::size_t mismatches = 0;
};

Outcome criterion_1() {
  std::mt19937_64 rng(1001);
  ComparingExecutor exec;
  std::size_t oracle_mismatch = 0;
  const int instances = 500;
  for (int i = 0; i < instances; ++i) {
    const std::size_t genes = 4 + rng() % 37;
    const std::size_t samples = 2 + rng() % 63;
    const std::size_t tumors = 1 + rng() % (samples - 1);
    const double sparsity = 0.85 + 0.14 * std::uniform_real_distribution<double>(0, 1)(rng);
    const unsigned h = 2 + static_cast<unsigned>(rng() % 3);
    auto dense = testing::sparsity_sorted(testing::random_dense(rng, genes, tumors, samples - tumors, 1 - sparsity));
    const auto m = testing::to_matrix(dense);
    greedy_cover(m, {h, 0.1, 64}, exec);
    // First round also against the materialize-all oracle on smaller spaces.
    if (choose(genes, h) <= 20000) {
      const auto oracle = testing::exhaustive_argmax(dense, h, 0.1);
      const auto got = pdfs_best(m, h, {0, lambda_total(genes, h)}, 0.1, true).best;
      if (oracle.has_value() != got.has_value() ||
          (oracle && (oracle->combo != got->combo || !same_bits(oracle->score, got->score)))) {
        ++oracle_mismatch;
      }
    }
  }
  return {exec.mismatches == 0 && oracle_mismatch == 0,
          std::to_string(instances) + " matrices, " + std::to_string(exec.rounds) + " rounds, " +
              std::to_string(exec.mismatches) + " pruned/unpruned mismatches, " + std::to_string(oracle_mismatch) +
              " oracle mismatches"};
}

Outcome criterion_2() {
  std::mt19937_64 rng(2002);
  std::size_t mismatches = 0;
  std::size_t rounds = 0;
  const int instances = 120;
  for (int i = 0; i < instances; ++i) {
    const std::size_t genes = 3 + rng() % 18;
    const std::size_t tumors = 1 + rng() % 24;
    const std::size_t normals = rng() % 12;
    const unsigned h = 2 + static_cast<unsigned>(rng() % std::min<std::size_t>(3, genes - 1));
    const double density = 0.1 + 0.4 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto dense = testing::random_dense(rng, genes, tumors, normals, density);
    SequentialExecutor exec;
    const auto got = greedy_cover(testing::to_matrix(dense), {h, 0.1, 64}, exec);
    const auto want = testing::naive_greedy(dense, h, 0.1, 64);
    bool equal = got.complete == want.complete && got.rounds.size() == want.rounds.size();
    for (std::size_t r = 0; equal && r < got.rounds.size(); ++r) {
      equal = got.rounds[r].combo == want.rounds[r].combo && same_bits(got.rounds[r].score, want.rounds[r].score) &&
              got.covered_history[r] == want.newly_covered[r];
    }
    for (const auto& st : got.round_stats) g_conservation.check(st, genes, h);
    rounds += got.rounds.size();
    if (!equal) ++mismatches;
  }
  return {mismatches == 0, std::to_string(instances) + " matrices, " + std::to_string(rounds) +
                               " rounds, " + std::to_string(mismatches) + " differing solutions"};
}

Outcome criterion_3() {
  const std::size_t genes = 200;
  const int seeds = 8;
  std::vector<double> mean(5, 0.0);
  for (unsigned h = 2; h <= 4; ++h) {
    for (int s = 0; s < seeds; ++s) {
      std::mt19937_64 rng(3000 + s);
      const auto dense = testing::sparsity_sorted(testing::random_dense(rng, genes, 64, 32, 0.05));
      const auto m = testing::to_matrix(dense);
      const auto r = pdfs_best(m, h, {0, lambda_total(genes, h)}, 0.1, true);
      g_conservation.check(r.stats, genes, h);
      mean[h] += static_cast<double>(r.stats.visited) / static_cast<double>(choose(genes, h)) / seeds;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "f(2)=%.5f f(3)=%.5f f(4)=%.5f over %d seeds", mean[2], mean[3], mean[4], seeds);
  return {mean[4] < mean[3] && mean[3] < mean[2] && mean[4] <= 0.10, buf};
}

Outcome criterion_4() {
  const std::vector<std::pair<std::size_t, std::size_t>> topologies{{1, 1}, {1, 4}, {2, 2}, {4, 4}, {8, 6}};
  std::mt19937_64 rng(4004);
  std::size_t runs = 0;
  std::size_t bad_coverage = 0;
  std::size_t no_termination = 0;
  std::size_t wrong_best = 0;
  std::size_t faults = 0;
  std::size_t steals = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [leaders, workers] = topologies[i % topologies.size()];
    const std::size_t genes = 8 + rng() % 17;
    const unsigned h = 2 + static_cast<unsigned>(rng() % 3);
    const auto dense = testing::sparsity_sorted(testing::random_dense(rng, genes, 12 + rng() % 40, rng() % 16, 0.2));
    const auto m = testing::to_matrix(dense);
    const auto total = lambda_total(genes, h);
    const auto seq = pdfs_best(m, h, {0, total}, 0.1, true);

    sched::SchedulerConfig cfg;
    cfg.topology.leaders = leaders;
    cfg.topology.workers_per_leader = workers;
    cfg.topology.leader_computes = rng() % 5 == 0;
    cfg.chunk_size = 1 + rng() % 9;
    cfg.seed = rng();
    sched::SimOptions opts;
    opts.interleaving_seed = rng();
    opts.serialize = i % 2 == 0;
    const auto r = sched::simulate_round(m, h, 0.1, true, cfg, opts);
    ++runs;
    faults += r.faults;
    steals += r.steals;

    auto processed = r.processed;
    std::sort(processed.begin(), processed.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    std::uint64_t next = 0;
    bool exact = true;
    for (const auto& p : processed) {
      if (p.start != next || p.empty()) exact = false;
      next = p.end;
    }
    if (!exact || next != total) ++bad_coverage;
    if (!r.terminated || r.premature) ++no_termination;
    if (!same_best(r.best, seq.best) || !(r.stats == seq.stats)) ++wrong_best;
    g_conservation.check(r.stats, genes, h);
  }
  return {bad_coverage == 0 && no_termination == 0 && wrong_best == 0,
          std::to_string(runs) + " interleavings, " + std::to_string(bad_coverage) + " coverage errors, " +
              std::to_string(no_termination) + " termination failures, " + std::to_string(wrong_best) +
              " argmax mismatches, " + std::to_string(steals) + " steals, " + std::to_string(faults) +
              " dropped messages"};
}

// Sparse genes never touch a tumor, so their pairs prune at once; all real
// work sits in pairs of the trailing dense block, which the partition hands
// to the last leader.
MutationMatrix skewed_matrix(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t genes = 220;
  const std::size_t dense_genes = 120;
  DenseMatrix d = testing::random_dense(rng, genes, 64, 16, 0.0);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t g = genes - dense_genes; g < genes; ++g) {
    for (std::size_t s = 0; s < d.num_tumor + d.num_normal; ++s) d.bits[g][s] = coin(rng);
  }
  return testing::to_matrix(d);
}

Outcome criterion_5() {
  const int runs = 50;
  int lower_spread = 0;
  double idle_with = 0.0;
  double idle_without = 0.0;
  std::size_t mismatches = 0;
  for (int i = 0; i < runs; ++i) {
    const auto m = skewed_matrix(5000 + i);
    const unsigned h = 4;
    sched::SchedulerConfig cfg;
    cfg.topology.leaders = 2;
    cfg.topology.workers_per_leader = 2;
    cfg.chunk_size = 64;
    cfg.seed = 77 + i;
    std::vector<MetricsSummary> s;
    std::optional<ScoredCombination> first;
    for (bool stealing : {true, false}) {
      cfg.stealing = stealing;
      const auto r = sched::run_round(m, h, 0.1, true, cfg, sched::TransportKind::kChannel);
      g_conservation.check(r.stats, m.gene_count(), h);
      if (stealing) {
        first = r.best;
      } else if (!same_best(first, r.best)) {
        ++mismatches;
      }
      s.push_back(summarize(r.metrics, m.gene_count(), h));
    }
    if (s[0].busy_stddev < s[1].busy_stddev) ++lower_spread;
    idle_with += s[0].idle_fraction_mean / runs;
    idle_without += s[1].idle_fraction_mean / runs;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "stddev lower with stealing in %d/%d runs, mean idle fraction %.4f -> %.4f",
                lower_spread, runs, idle_without, idle_with);
  return {lower_spread * 100 >= 95 * runs && idle_with < idle_without && mismatches == 0, buf};
}

Outcome criterion_6() {
  return {g_conservation.violations == 0 && g_conservation.runs > 0,
          std::to_string(g_conservation.runs) + " searches checked, " + std::to_string(g_conservation.violations) +
              " violations"};
}

std::string random_name(std::mt19937_64& rng) {
  static const std::string chars = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-._ ";
  std::string s(1 + rng() % 12, 'A');
  for (auto& c : s) c = chars[rng() % chars.size()];
  s.front() = 'G';
  s.back() = 'X';
  return s;
}

bool frames_round_trip() {
  const auto dense_m = [] {
    std::mt19937_64 rng(7);
    return testing::to_matrix(testing::random_dense(rng, 9, 70, 5, 0.3));
  }();
  ScoredCombination sc;
  sc.combo = {3, 8, 11, 40};
  sc.score = 0.1 + 1e-17;
  const std::vector<sched::Message> variants{
      sched::WorkRequest{},        sched::WorkGrant{{5, 1ULL << 50}},
      sched::NoWork{},             sched::StealRequest{},
      sched::StealReply{},         sched::StealReply{LambdaInterval{9, 19}},
      sched::Token{sched::TokenColor::kWhite}, sched::Token{sched::TokenColor::kBlack},
      sched::Terminate{},          sched::Report{},
      sched::Report{sc, {4, 5, 6}}, sched::make_setup(dense_m, 4, 0.1, false)};
  bool ok = true;
  std::vector<bool> seen(std::variant_size_v<sched::Message>, false);
  sched::SocketTransport transport(2);
  for (const auto& msg : variants) {
    seen[msg.index()] = true;
    const auto frame = sched::encode(msg);
    ok = ok && sched::encode(sched::decode(frame)) == frame;
    transport.send({0, 1, msg});
    const auto got = transport.receive(1);
    ok = ok && got.from == 0 && got.to == 1 && sched::encode(got.msg) == frame;
  }
  transport.close();
  return ok && std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

Outcome criterion_7() {
  std::mt19937_64 rng(7007);
  const int instances = 1000;
  int failures = 0;
  const auto dir = std::filesystem::temp_directory_path() / ("multihit_acc_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  for (int i = 0; i < instances; ++i) {
    const std::size_t genes = rng() % 40;
    const std::size_t tumors = rng() % 150;
    const std::size_t normals = rng() % 100;
    auto dense = testing::random_dense(rng, genes, tumors, normals, std::uniform_real_distribution<double>(0, 1)(rng));
    std::vector<BitRow> rows = testing::to_matrix(dense).rows();
    std::vector<std::string> names;
    std::set<std::string> used;
    while (names.size() < genes) {
      auto n = random_name(rng);
      if (used.insert(n).second) names.push_back(n);
    }
    const MutationMatrix m(rows, tumors, normals, names);
    const GeneMap map(names);
    bool ok = true;
    if (i % 10 == 0) {
      const auto packed = (dir / "m.bin").string();
      const auto genes_path = dir / "genes.tsv";
      save_packed(m, packed);
      {
        std::ofstream out(genes_path);
        map.write(out);
      }
      const auto back = load_packed(packed, genes_path.string());
      ok = back.rows() == m.rows() && back.gene_ids() == names && back.num_tumor() == tumors &&
           back.num_normal() == normals;
    } else {
      std::stringstream bin;
      std::stringstream text;
      write_packed(m, bin);
      map.write(text);
      const auto back = read_packed(bin);
      ok = back.rows() == m.rows() && back.num_tumor() == tumors && back.num_normal() == normals &&
           GeneMap::read(text) == map;
    }
    if (!ok) ++failures;
  }
  std::filesystem::remove_all(dir);
  const bool frames = frames_round_trip();
  return {failures == 0 && frames, std::to_string(instances) + " matrix/gene-map round trips, " +
                                       std::to_string(failures) + " failures; socket frames " +
                                       (frames ? "ok for every variant" : "FAILED")};
}

Outcome criterion_8() {
  std::size_t complete_runs = 0;
  std::size_t verified = 0;
  std::size_t runs = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    SyntheticSpec spec;
    spec.genes = 40 + seed * 5;
    spec.tumors = 30 + seed * 3;
    spec.normals = 20;
    spec.sparsity = 0.9;
    spec.seed = seed;
    spec.plant_hits = 2 + seed % 3;
    const auto cohort = synthetic_cohort(spec);
    const auto [m, genes] = pack_cohort(cohort);
    sched::SchedulerConfig cfg;
    cfg.topology.leaders = 1 + seed % 3;
    cfg.topology.workers_per_leader = 1 + seed % 2;
    cfg.chunk_size = 64;
    cfg.seed = seed;
    const auto kind = seed % 4 == 0 ? sched::TransportKind::kSocket : sched::TransportKind::kChannel;
    sched::ScheduledExecutor exec(cfg, kind);
    const auto solution = greedy_cover(m, {spec.plant_hits, 0.1, 64}, exec);
    ++runs;
    for (const auto& st : solution.round_stats) g_conservation.check(st, m.gene_count(), spec.plant_hits);
    if (!solution.complete) continue;
    ++complete_runs;
    std::stringstream out;
    write_solution(solution, out);
    const auto report = verify_cover(out, cohort, genes);
    if (report.complete() && report.covered_tumors == cohort.tumor_samples.size()) ++verified;
  }
  return {complete_runs > 0 && verified == complete_runs,
          std::to_string(verified) + "/" + std::to_string(complete_runs) + " complete runs verified at 100% (" +
              std::to_string(runs) + " runs)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
      {5, criterion_5}, {7, criterion_7}, {8, criterion_8}, {6, criterion_6}};
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  for (const auto& [id, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, " [%.1fs]", secs);
    lines.emplace_back(id, std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + ": " +
                               o.detail + buf);
    all = all && o.pass;
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  return all ? 0 : 1;
}
