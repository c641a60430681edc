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

#include "multihit/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "multihit/error.hpp"

namespace multihit {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

ParseSummary parse_maf(std::istream& source, const ColumnMap& columns,
                       const std::function<void(const MafRecord&)>& sink) {
  ParseSummary summary;
  std::string line;
  std::size_t gene_col = 0;
  std::size_t class_col = 0;
  std::size_t sample_col = 0;
  std::size_t needed = 0;
  bool have_header = false;

  while (std::getline(source, line)) {
    ++summary.lines;
    chomp(line);
    if (line.empty() || line.front() == '#') {
      ++summary.comments;
      continue;
    }
    const auto fields = split(line, '\t');
    if (!have_header) {
      auto find = [&](const std::string& name) {
        const auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end()) throw ConfigError("MAF header is missing column '" + name + "'");
        return static_cast<std::size_t>(it - fields.begin());
      };
      gene_col = find(columns.gene);
      class_col = find(columns.classification);
      sample_col = find(columns.sample);
      needed = std::max({gene_col, class_col, sample_col}) + 1;
      have_header = true;
      ++summary.header_lines;
      continue;
    }
    if (fields.size() < needed || fields[gene_col].empty() || fields[class_col].empty() ||
        fields[sample_col].empty()) {
      ++summary.malformed;
      summary.malformed_lines.push_back(summary.lines);
      continue;
    }
    ++summary.records;
    sink(MafRecord{std::string(fields[gene_col]), std::string(fields[class_col]),
                   std::string(fields[sample_col])});
  }
  if (!have_header) throw ConfigError("MAF input has no header line");
  return summary;
}

std::optional<SampleClass> classify_tcga_barcode(std::string_view barcode) {
  const auto parts = split(barcode, '-');
  if (parts.size() < 4 || parts[3].size() < 2) return std::nullopt;
  int code = 0;
  const auto field = parts[3].substr(0, 2);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + 2, code);
  if (ec != std::errc() || ptr != field.data() + 2) return std::nullopt;
  if (code >= 1 && code <= 9) return SampleClass::kTumor;
  if (code >= 10 && code <= 14) return SampleClass::kNormal;
  return std::nullopt;
}

SampleClassifier explicit_classifier(std::set<std::string> tumors, std::set<std::string> normals) {
  return [tumors = std::move(tumors),
          normals = std::move(normals)](std::string_view barcode) -> std::optional<SampleClass> {
    const std::string key(barcode);
    if (tumors.contains(key)) return SampleClass::kTumor;
    if (normals.contains(key)) return SampleClass::kNormal;
    return std::nullopt;
  };
}

bool VariantFilter::keep(std::string_view classification) const {
  const auto key = lower(classification);
  if (std::any_of(deny.begin(), deny.end(), [&](const auto& d) { return lower(d) == key; })) {
    return false;
  }
  if (allow.empty()) return true;
  return std::any_of(allow.begin(), allow.end(), [&](const auto& a) { return lower(a) == key; });
}

CohortBuilder::CohortBuilder(SampleClassifier classify, VariantFilter filter)
    : classify_(std::move(classify)), filter_(std::move(filter)) {}

void CohortBuilder::add(const MafRecord& record) {
  if (!filter_.keep(record.variant_classification)) {
    ++summary_.dropped_filtered;
    return;
  }
  auto it = seen_.find(record.sample_barcode);
  if (it == seen_.end()) {
    const auto cls = classify_(record.sample_barcode);
    if (!cls) {
      ++summary_.dropped_unclassified;
      summary_.unclassified_barcodes.insert(record.sample_barcode);
      return;
    }
    it = seen_.emplace(record.sample_barcode, *cls).first;
    (*cls == SampleClass::kTumor ? cohort_.tumor_samples : cohort_.normal_samples)
        .push_back(record.sample_barcode);
  }
  ++summary_.kept;
  cohort_.gene_to_samples[record.gene_symbol].insert(record.sample_barcode);
}

CohortIntermediate build_cohort(const std::vector<MafRecord>& records, SampleClassifier classify,
                                VariantFilter filter, CohortSummary* summary) {
  CohortBuilder builder(std::move(classify), std::move(filter));
  for (const auto& r : records) builder.add(r);
  if (summary) *summary = builder.summary();
  return builder.build();
}

std::pair<MutationMatrix, GeneMap> pack_cohort(const CohortIntermediate& cohort) {
  if (cohort.tumor_samples.empty()) throw ConfigError("pack: cohort has no tumor samples");
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < cohort.tumor_samples.size(); ++i) column[cohort.tumor_samples[i]] = i;
  for (std::size_t i = 0; i < cohort.normal_samples.size(); ++i) {
    column[cohort.normal_samples[i]] = cohort.tumor_samples.size() + i;
  }
  const std::size_t width = column.size();
  if (width != cohort.tumor_samples.size() + cohort.normal_samples.size()) {
    throw ConfigError("pack: a sample is listed as both tumor and normal");
  }

  std::vector<BitRow> rows;
  std::vector<std::string> names;
  for (const auto& [gene, samples] : cohort.gene_to_samples) {
    BitRow row(width);
    for (const auto& s : samples) {
      const auto it = column.find(s);
      if (it == column.end()) throw ConfigError("pack: sample '" + s + "' is in no sample list");
      row.set(it->second);
    }
    rows.push_back(std::move(row));
    names.push_back(gene);
  }
  MutationMatrix raw(std::move(rows), cohort.tumor_samples.size(), cohort.normal_samples.size(),
                     std::move(names));
  return sort_by_sparsity(raw);
}

void write_tumor_matrix(const CohortIntermediate& cohort, std::ostream& out) {
  for (std::size_t i = 0; i < cohort.tumor_samples.size(); ++i) {
    if (i > 0) out << '\t';
    out << cohort.tumor_samples[i];
  }
  out << '\n';
  for (const auto& [gene, samples] : cohort.gene_to_samples) {
    out << gene << '\t';
    for (std::size_t i = 0; i < cohort.tumor_samples.size(); ++i) {
      if (i > 0) out << ',';
      out << (samples.contains(cohort.tumor_samples[i]) ? '1' : '0');
    }
    out << '\n';
  }
}

void write_normal_list(const CohortIntermediate& cohort, std::ostream& out) {
  out << "#normals";
  for (const auto& s : cohort.normal_samples) out << '\t' << s;
  out << '\n';
  for (const auto& [gene, samples] : cohort.gene_to_samples) {
    for (const auto& s : cohort.normal_samples) {
      if (samples.contains(s)) out << gene << '\t' << s << '\n';
    }
  }
}

CohortIntermediate read_intermediates(std::istream& tumor_matrix, std::istream& normal_list) {
  CohortIntermediate cohort;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(tumor_matrix, line)) throw FormatError("tumor matrix: missing header", 0);
  ++lineno;
  chomp(line);
  if (!line.empty()) {
    for (auto id : split(line, '\t')) cohort.tumor_samples.emplace_back(id);
  }
  while (std::getline(tumor_matrix, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw FormatError("tumor matrix: expected gene<TAB>bits", lineno);
    const std::string gene = line.substr(0, tab);
    const auto bits_text = std::string_view(line).substr(tab + 1);
    auto& samples = cohort.gene_to_samples[gene];
    if (cohort.tumor_samples.empty()) {
      if (!bits_text.empty()) throw FormatError("tumor matrix: bits without samples", lineno);
      continue;
    }
    const auto bits = split(bits_text, ',');
    if (bits.size() != cohort.tumor_samples.size()) {
      throw FormatError("tumor matrix: row width does not match header", lineno);
    }
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == "1") {
        samples.insert(cohort.tumor_samples[i]);
      } else if (bits[i] != "0") {
        throw FormatError("tumor matrix: bit must be 0 or 1", lineno);
      }
    }
  }

  lineno = 0;
  std::set<std::string> known_normals;
  while (std::getline(normal_list, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    if (line.rfind("#normals", 0) == 0) {
      const auto ids = split(line, '\t');
      for (std::size_t i = 1; i < ids.size(); ++i) {
        if (known_normals.emplace(ids[i]).second) cohort.normal_samples.emplace_back(ids[i]);
      }
      continue;
    }
    if (line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw FormatError("normal list: expected gene<TAB>sample", lineno);
    }
    const std::string sample(fields[1]);
    if (known_normals.insert(sample).second) cohort.normal_samples.push_back(sample);
    cohort.gene_to_samples[std::string(fields[0])].insert(sample);
  }
  return cohort;
}

CohortIntermediate read_intermediates(const std::string& tumor_path, const std::string& normal_path) {
  std::ifstream tumor(tumor_path);
  if (!tumor) throw ConfigError("cannot open " + tumor_path);
  std::ifstream normal(normal_path);
  if (!normal) throw ConfigError("cannot open " + normal_path);
  return read_intermediates(tumor, normal);
}

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 5) throw ConfigError("--synthetic expects G,T,N,sparsity,seed");
  SyntheticSpec spec;
  try {
    spec.genes = std::stoul(std::string(parts[0]));
    spec.tumors = std::stoul(std::string(parts[1]));
    spec.normals = std::stoul(std::string(parts[2]));
    spec.sparsity = std::stod(std::string(parts[3]));
    spec.seed = std::stoull(std::string(parts[4]));
  } catch (const std::logic_error&) {
    throw ConfigError("--synthetic expects G,T,N,sparsity,seed");
  }
  if (spec.genes == 0 || spec.tumors == 0 || spec.sparsity < 0 || spec.sparsity > 1) {
    throw ConfigError("--synthetic: need G >= 1, T >= 1, 0 <= sparsity <= 1");
  }
  return spec;
}

CohortIntermediate synthetic_cohort(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  // Top 53 bits as a uniform double; unlike std::uniform_real_distribution
  // this is identical across standard libraries.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto pad = [](std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
  };

  CohortIntermediate c;
  for (std::size_t t = 0; t < spec.tumors; ++t) c.tumor_samples.push_back("TUMOR-" + pad(t));
  for (std::size_t n = 0; n < spec.normals; ++n) c.normal_samples.push_back("NORMAL-" + pad(n));
  std::vector<std::string> genes;
  for (std::size_t g = 0; g < spec.genes; ++g) {
    genes.push_back("GENE" + pad(g));
    c.gene_to_samples[genes.back()];
  }

  const double density = 1.0 - spec.sparsity;
  for (const auto& gene : genes) {
    for (const auto& s : c.tumor_samples) {
      if (uniform() < density) c.gene_to_samples[gene].insert(s);
    }
    for (const auto& s : c.normal_samples) {
      if (uniform() < density) c.gene_to_samples[gene].insert(s);
    }
  }

  if (spec.plant_hits > 0 && spec.plant_hits <= spec.genes) {
    const std::size_t groups = std::max<std::size_t>(1, spec.tumors / 8);
    std::vector<std::vector<std::size_t>> planted(groups);
    for (auto& combo : planted) {
      std::vector<std::size_t> idx(spec.genes);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      for (unsigned k = 0; k < spec.plant_hits; ++k) {
        const auto j = k + static_cast<std::size_t>(rng() % (spec.genes - k));
        std::swap(idx[k], idx[j]);
        combo.push_back(idx[k]);
      }
    }
    for (std::size_t t = 0; t < spec.tumors; ++t) {
      for (auto g : planted[t % groups]) c.gene_to_samples[genes[g]].insert(c.tumor_samples[t]);
    }
  }
  return c;
}

}  // namespace multihit
