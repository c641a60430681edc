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

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "multihit/bitmat.hpp"
#include "multihit/cover.hpp"
#include "multihit/error.hpp"
#include "multihit/ingest.hpp"
#include "multihit/metrics.hpp"
#include "multihit/sched/runtime.hpp"
#include "multihit/sched/transport.hpp"

namespace fs = std::filesystem;
using namespace multihit;

namespace {

constexpr const char* kTumorMatrix = "tumor_matrix.tsv";
constexpr const char* kNormalList = "normal_list.tsv";
constexpr const char* kPacked = "packed.bin";
constexpr const char* kGeneMap = "gene_map.tsv";

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("multihit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MULTIHIT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only honour it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path.string());
  return in;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create directory: " + dir.string());
}

std::set<std::string> read_id_list(const std::string& path) {
  auto in = open_in(path);
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') ids.insert(line);
  }
  return ids;
}

std::vector<fs::path> collect_maf_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    const fs::path p(input);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.size() > 4 && name.ends_with(".maf")) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw ConfigError("no such MAF file or directory: " + input);
    }
  }
  if (files.empty()) throw ConfigError("no MAF inputs found");
  return files;
}

void write_intermediates(const CohortIntermediate& cohort, const fs::path& dir) {
  ensure_dir(dir);
  auto tumor = open_out(dir / kTumorMatrix);
  write_tumor_matrix(cohort, tumor);
  auto normal = open_out(dir / kNormalList);
  write_normal_list(cohort, normal);
}

void write_packed_pair(const CohortIntermediate& cohort, const fs::path& dir) {
  ensure_dir(dir);
  const auto [matrix, genes] = pack_cohort(cohort);
  save_packed(matrix, (dir / kPacked).string());
  auto map_out = open_out(dir / kGeneMap);
  genes.write(map_out);
  spdlog::info("packed {} genes x {} tumors + {} normals", matrix.gene_count(), matrix.num_tumor(),
               matrix.num_normal());
}

struct PreprocessArgs {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::string tumor_list;
  std::string normal_list;
  std::vector<std::string> allow;
  std::vector<std::string> deny;
  std::string synthetic;
  std::string gene_column = "Hugo_Symbol";
  std::string class_column = "Variant_Classification";
  std::string sample_column = "Tumor_Sample_Barcode";
};

int cmd_preprocess(const PreprocessArgs& a) {
  CohortIntermediate cohort;
  if (!a.synthetic.empty()) {
    cohort = synthetic_cohort(parse_synthetic_spec(a.synthetic));
  } else {
    if (a.tumor_list.empty() != a.normal_list.empty()) {
      throw UsageError("--tumor-list and --normal-list must be given together");
    }
    const SampleClassifier classify = a.tumor_list.empty()
                                          ? SampleClassifier(classify_tcga_barcode)
                                          : explicit_classifier(read_id_list(a.tumor_list),
                                                                read_id_list(a.normal_list));
    VariantFilter filter;
    if (!a.deny.empty()) filter.deny = {a.deny.begin(), a.deny.end()};
    filter.allow = {a.allow.begin(), a.allow.end()};
    CohortBuilder builder(classify, filter);
    const ColumnMap columns{a.gene_column, a.class_column, a.sample_column};
    for (const auto& file : collect_maf_inputs(a.inputs)) {
      auto in = open_in(file);
      const auto s = parse_maf(in, columns, [&](const MafRecord& r) { builder.add(r); });
      spdlog::info("{}: {} records, {} malformed", file.string(), s.records, s.malformed);
      for (auto line : s.malformed_lines) spdlog::debug("{}: malformed line {}", file.string(), line);
    }
    const auto& s = builder.summary();
    spdlog::info("kept {}, filtered {}, unclassified {}", s.kept, s.dropped_filtered, s.dropped_unclassified);
    cohort = builder.build();
  }
  write_intermediates(cohort, a.out_dir);
  std::cout << "tumors " << cohort.tumor_samples.size() << " normals " << cohort.normal_samples.size()
            << " genes " << cohort.gene_to_samples.size() << '\n';
  return 0;
}

int cmd_pack(const std::string& in_dir, const std::string& out_dir) {
  const fs::path dir(in_dir);
  const auto cohort = read_intermediates((dir / kTumorMatrix).string(), (dir / kNormalList).string());
  write_packed_pair(cohort, out_dir);
  std::cout << "wrote " << (fs::path(out_dir) / kPacked).string() << '\n';
  return 0;
}

struct RunArgs {
  unsigned hits = 4;
  double alpha = 0.1;
  bool no_prune = false;
  std::size_t leaders = 1;
  std::size_t workers = 1;
  bool leader_computes = false;
  std::uint64_t chunk = 1024;
  std::uint64_t seed = 1;
  std::size_t max_rounds = 64;
  std::string transport = "channel";
  std::string synthetic;
  std::string input_dir;
  std::string out_dir = ".";
};

sched::SchedulerConfig scheduler_config(const RunArgs& a, std::size_t leaders, std::size_t workers) {
  if (a.hits < 2) throw UsageError("--hits must be >= 2");
  if (!(a.alpha > 0.0)) throw UsageError("--alpha must be > 0");
  if (leaders == 0 || workers == 0) throw UsageError("--leaders and --workers must be >= 1");
  if (a.chunk == 0) throw UsageError("--chunk must be >= 1");
  sched::SchedulerConfig c;
  c.topology.leaders = leaders;
  c.topology.workers_per_leader = workers;
  c.topology.leader_computes = a.leader_computes;
  c.chunk_size = a.chunk;
  c.seed = a.seed;
  return c;
}

// Loads the packed matrix from the input directory, or synthesizes one and
// writes its intermediates and packed files into the output directory so the
// run can be verified afterwards.
MutationMatrix load_input(const RunArgs& a) {
  if (!a.synthetic.empty()) {
    if (!a.input_dir.empty()) throw UsageError("give either --input or --synthetic, not both");
    auto spec = parse_synthetic_spec(a.synthetic);
    spec.plant_hits = a.hits;
    const auto cohort = synthetic_cohort(spec);
    write_intermediates(cohort, a.out_dir);
    write_packed_pair(cohort, a.out_dir);
    return load_packed((fs::path(a.out_dir) / kPacked).string());
  }
  if (a.input_dir.empty()) throw UsageError("one of --input or --synthetic is required");
  const fs::path dir(a.input_dir);
  return load_packed((dir / kPacked).string());
}

int cmd_search(const RunArgs& a) {
  const auto config = scheduler_config(a, a.leaders, a.workers);
  const auto kind = sched::parse_transport_kind(a.transport);
  ensure_dir(a.out_dir);
  const auto matrix = load_input(a);
  sched::ScheduledExecutor executor(config, kind, !a.no_prune);
  const auto t0 = std::chrono::steady_clock::now();
  const auto solution = greedy_cover(matrix, {a.hits, a.alpha, a.max_rounds}, executor);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto out = open_out(fs::path(a.out_dir) / "output.txt");
  write_solution(solution, out);
  auto csv = open_out(fs::path(a.out_dir) / "metrics.csv");
  write_metrics_header(csv);
  std::vector<RunMetrics> all;
  for (std::size_t r = 0; r < executor.round_metrics().size(); ++r) {
    const auto& rows = executor.round_metrics()[r];
    write_metrics_rows(csv, r, rows);
    all.insert(all.end(), rows.begin(), rows.end());
  }
  if (!all.empty()) {
    const auto s = summarize(all, matrix.gene_count(), a.hits);
    spdlog::info("busy mean {:.6f}s stddev {:.6f}s, idle fraction {:.4f}, visited {} of {}", s.busy_mean,
                 s.busy_stddev, s.idle_fraction_mean, s.total_visited, s.search_space);
  }
  if (executor.faults() > 0) spdlog::warn("{} unexpected scheduler messages dropped", executor.faults());
  std::cout << "rounds " << solution.rounds.size() << " covered " << solution.covered_tumors() << "/"
            << matrix.num_tumor() << " wall " << wall << "s\n";
  if (!solution.complete) {
    spdlog::warn("{}", solution.diagnostic);
    std::cout << "incomplete: " << solution.diagnostic << '\n';
  }
  return 0;
}

int cmd_verify(const std::string& solution_path, const std::string& data_dir) {
  const fs::path dir(data_dir);
  const auto cohort = read_intermediates((dir / kTumorMatrix).string(), (dir / kNormalList).string());
  auto map_in = open_in(dir / kGeneMap);
  const auto genes = GeneMap::read(map_in);
  auto sol = open_in(solution_path);
  const auto report = verify_cover(sol, cohort, genes);
  const double pct = report.tumors == 0 ? 100.0 : 100.0 * report.covered_tumors / report.tumors;
  std::ostringstream line;
  line.precision(pct == 100.0 ? 3 : 4);
  line << "covered " << pct << "% tumors " << report.covered_tumors << "/" << report.tumors << " normals "
       << report.covered_normals << "/" << report.normals;
  std::cout << line.str() << '\n';
  for (const auto& t : report.uncovered_tumors) std::cout << "uncovered\t" << t << '\n';
  return report.complete() ? 0 : 1;
}

int cmd_convert(const std::string& solution_path, const std::string& map_path, const std::string& out_path) {
  auto map_in = open_in(map_path);
  const auto genes = GeneMap::read(map_in);
  auto sol = open_in(solution_path);
  std::ostringstream buf;
  convert_indices(sol, genes, buf);
  if (out_path.empty() || out_path == "-") {
    std::cout << buf.str();
  } else {
    auto out = open_out(out_path);
    out << buf.str();
  }
  return 0;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_topologies(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument(item);
      std::size_t used = 0;
      const auto l = std::stoul(item.substr(0, x), &used);
      if (used != x) throw std::invalid_argument(item);
      const auto w = std::stoul(item.substr(x + 1), &used);
      if (used != item.size() - x - 1) throw std::invalid_argument(item);
      out.emplace_back(l, w);
    } catch (const std::exception&) {
      throw ConfigError("bad topology '" + item + "', expected LxW");
    }
  }
  if (out.empty()) throw ConfigError("no topologies given");
  return out;
}

int cmd_bench(RunArgs a, const std::vector<unsigned>& hits_list, const std::string& topologies,
              const std::string& csv_path) {
  const auto topo = parse_topologies(topologies);
  const auto kind = sched::parse_transport_kind(a.transport);
  ensure_dir(a.out_dir);
  std::ostringstream csv;
  csv << "hits,leaders,workers,prune,rounds,wall_seconds,visited,pruned_combinations,visited_fraction,"
         "busy_stddev,idle_fraction_mean\n";
  for (unsigned h : hits_list) {
    a.hits = h;
    const auto matrix = load_input(a);
    for (const auto& [l, w] : topo) {
      const auto config = scheduler_config(a, l, w);
      sched::ScheduledExecutor executor(config, kind, !a.no_prune);
      const auto t0 = std::chrono::steady_clock::now();
      const auto solution = greedy_cover(matrix, {h, a.alpha, a.max_rounds}, executor);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      // Visited fraction is reported for the first round, where the whole
      // search space is live.
      const auto& first = executor.round_metrics().front();
      const auto s = summarize(first, matrix.gene_count(), h);
      csv << h << ',' << l << ',' << w << ',' << (a.no_prune ? 0 : 1) << ',' << solution.rounds.size() << ','
          << wall << ',' << s.total_visited << ',' << s.total_pruned << ',' << s.visited_fraction << ','
          << s.busy_stddev << ',' << s.idle_fraction_mean << '\n';
      spdlog::info("h={} {}x{} wall {:.3f}s", h, l, w, wall);
    }
  }
  if (csv_path.empty() || csv_path == "-") {
    std::cout << csv.str();
  } else {
    auto out = open_out(csv_path);
    out << csv.str();
  }
  return 0;
}

int error_exit(const char* kind, const std::string& what, int code) {
  std::string one_line = what;
  std::replace(one_line.begin(), one_line.end(), '\n', ' ');
  std::cerr << "error\t" << kind << '\t' << one_line << '\n';
  return code;
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--hits", a.hits, "Genes per combination")->capture_default_str();
  cmd->add_option("--alpha", a.alpha, "Tumor weight in the score")->capture_default_str();
  cmd->add_flag("--no-prune", a.no_prune, "Disable sparsity pruning");
  cmd->add_option("--leaders", a.leaders, "Leader count")->capture_default_str();
  cmd->add_option("--workers", a.workers, "Workers per leader")->capture_default_str();
  cmd->add_flag("--leader-computes", a.leader_computes, "Add a compute worker beside each leader");
  cmd->add_option("--chunk", a.chunk, "Lambda indices per work grant")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Scheduler seed")->capture_default_str();
  cmd->add_option("--max-rounds", a.max_rounds, "Greedy round limit")->capture_default_str();
  cmd->add_option("--transport", a.transport, "channel or socket")->capture_default_str();
  cmd->add_option("--synthetic", a.synthetic, "Generate input: G,T,N,sparsity,seed");
  cmd->add_option("--input", a.input_dir, "Directory holding packed.bin");
  cmd->add_option("--out", a.out_dir, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Multi-hit gene combination search"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "MAF files to cohort intermediates");
  preprocess->add_option("inputs", pre.inputs, "MAF files or directories");
  preprocess->add_option("--out", pre.out_dir, "Output directory")->capture_default_str();
  preprocess->add_option("--tumor-list", pre.tumor_list, "File of tumor sample ids");
  preprocess->add_option("--normal-list", pre.normal_list, "File of normal sample ids");
  preprocess->add_option("--allow", pre.allow, "Keep only these variant classes");
  preprocess->add_option("--deny", pre.deny, "Drop these variant classes (default Silent)");
  preprocess->add_option("--synthetic", pre.synthetic, "Generate a cohort: G,T,N,sparsity,seed");
  preprocess->add_option("--gene-column", pre.gene_column)->capture_default_str();
  preprocess->add_option("--class-column", pre.class_column)->capture_default_str();
  preprocess->add_option("--sample-column", pre.sample_column)->capture_default_str();

  std::string pack_in = ".";
  std::string pack_out = ".";
  auto* pack = app.add_subcommand("pack", "Intermediates to packed matrix and gene map");
  pack->add_option("--input", pack_in, "Directory with the intermediates")->capture_default_str();
  pack->add_option("--out", pack_out, "Output directory")->capture_default_str();

  RunArgs run;
  auto* search = app.add_subcommand("search", "Greedy cover over a packed matrix");
  add_run_options(search, run);

  std::string solution;
  std::string data_dir = ".";
  auto* verify = app.add_subcommand("verify", "Check tumor coverage of a solution");
  verify->add_option("solution", solution, "Solution file")->required();
  verify->add_option("--data", data_dir, "Directory with intermediates and gene map")->capture_default_str();

  std::string gene_map;
  std::string convert_out;
  auto* convert = app.add_subcommand("convert", "Replace gene indices by names");
  convert->add_option("solution", solution, "Solution file")->required();
  convert->add_option("--gene-map", gene_map, "Gene map file")->required();
  convert->add_option("--out", convert_out, "Output file (default stdout)");

  RunArgs bench_args;
  std::vector<unsigned> bench_hits{2, 3, 4};
  std::string bench_topologies = "1x1,1x2,2x2";
  std::string bench_csv;
  auto* bench = app.add_subcommand("bench", "Sweep topologies and hit counts");
  add_run_options(bench, bench_args);
  bench->add_option("--hits-list", bench_hits, "Hit counts to sweep")->delimiter(',');
  bench->add_option("--topologies", bench_topologies, "Comma list of LxW")->capture_default_str();
  bench->add_option("--csv", bench_csv, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error_exit("usage", e.what(), 2);
  }

  try {
    if (*preprocess) return cmd_preprocess(pre);
    if (*pack) return cmd_pack(pack_in, pack_out);
    if (*search) return cmd_search(run);
    if (*verify) return cmd_verify(solution, data_dir);
    if (*convert) return cmd_convert(solution, gene_map, convert_out);
    if (*bench) return cmd_bench(bench_args, bench_hits, bench_topologies, bench_csv);
  } catch (const UsageError& e) {
    return error_exit("usage", e.what(), 2);
  } catch (const ConfigError& e) {
    return error_exit("config", e.what(), 3);
  } catch (const FormatError& e) {
    return error_exit("format", e.what(), 4);
  } catch (const TransportError& e) {
    return error_exit("transport", e.what(), 5);
  } catch (const std::exception& e) {
    return error_exit("internal", e.what(), 1);
  }
  return 0;
}
