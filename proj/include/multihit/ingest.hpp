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
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multihit/bitmat.hpp"

namespace multihit {

struct MafRecord {
  std::string gene_symbol;
  std::string variant_classification;
  std::string sample_barcode;
};

struct ColumnMap {
  std::string gene = "Hugo_Symbol";
  std::string classification = "Variant_Classification";
  std::string sample = "Tumor_Sample_Barcode";
};

struct ParseSummary {
  std::size_t lines = 0;
  std::size_t header_lines = 0;
  std::size_t comments = 0;  // '#' lines and blank lines
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::vector<std::size_t> malformed_lines;  // 1-based
};

// Streams records from a MAF-like TSV. The first non-comment line is the
// header. Malformed data lines are counted and skipped, never fatal.
// Throws ConfigError when a configured column is absent from the header.
ParseSummary parse_maf(std::istream& source, const ColumnMap& columns,
                       const std::function<void(const MafRecord&)>& sink);

enum class SampleClass { kTumor, kNormal };

using SampleClassifier = std::function<std::optional<SampleClass>(std::string_view barcode)>;

// TCGA barcode rule: the two-digit sample-type code of the fourth
// '-'-separated field; 01-09 tumor, 10-14 normal, anything else unclassified.
std::optional<SampleClass> classify_tcga_barcode(std::string_view barcode);

// Two-list mode: classification by explicit membership.
SampleClassifier explicit_classifier(std::set<std::string> tumors, std::set<std::string> normals);

// Case-insensitive variant-type filter. An empty allow list admits
// everything not denied.
struct VariantFilter {
  std::set<std::string> deny{"silent"};
  std::set<std::string> allow;

  bool keep(std::string_view classification) const;
};

struct CohortIntermediate {
  std::vector<std::string> tumor_samples;   // first-appearance order
  std::vector<std::string> normal_samples;  // first-appearance order
  std::map<std::string, std::set<std::string>> gene_to_samples;

  friend bool operator==(const CohortIntermediate&, const CohortIntermediate&) = default;
};

struct CohortSummary {
  std::size_t kept = 0;
  std::size_t dropped_filtered = 0;
  std::size_t dropped_unclassified = 0;
  std::set<std::string> unclassified_barcodes;
};

// Accumulates filtered records. A sample becomes a column only once it has a
// retained record.
class CohortBuilder {
 public:
  explicit CohortBuilder(SampleClassifier classify = classify_tcga_barcode,
                         VariantFilter filter = {});

  void add(const MafRecord& record);
  const CohortSummary& summary() const { return summary_; }
  CohortIntermediate build() const { return cohort_; }

 private:
  SampleClassifier classify_;
  VariantFilter filter_;
  CohortIntermediate cohort_;
  std::map<std::string, SampleClass> seen_;
  CohortSummary summary_;
};

CohortIntermediate build_cohort(const std::vector<MafRecord>& records,
                                SampleClassifier classify = classify_tcga_barcode,
                                VariantFilter filter = {}, CohortSummary* summary = nullptr);

// Columns tumor-then-normal in list order; rows start in gene-name order and
// are then sparsity-sorted. Throws ConfigError with no tumor samples.
std::pair<MutationMatrix, GeneMap> pack_cohort(const CohortIntermediate& cohort);

// Intermediate text files.
//   tumor matrix: line 1 = tumor sample IDs, TAB-separated;
//                 then "gene<TAB>b,b,...,b" with one 0/1 per tumor sample.
//   normal list:  "gene<TAB>sampleID" per mutated (gene, normal) pair. A
//                 leading "#normals<TAB>id<TAB>id..." line lists all normal
//                 samples so samples are kept even with zero pairs.
void write_tumor_matrix(const CohortIntermediate& cohort, std::ostream& out);
void write_normal_list(const CohortIntermediate& cohort, std::ostream& out);
CohortIntermediate read_intermediates(std::istream& tumor_matrix, std::istream& normal_list);
CohortIntermediate read_intermediates(const std::string& tumor_path, const std::string& normal_path);

struct SyntheticSpec {
  std::size_t genes = 100;
  std::size_t tumors = 64;
  std::size_t normals = 32;
  double sparsity = 0.95;
  std::uint64_t seed = 1;
  // When > 0, each tumor receives one of a few planted h-gene combinations so
  // a complete h-hit cover exists.
  unsigned plant_hits = 0;
};

// Parses "G,T,N,sparsity,seed".
SyntheticSpec parse_synthetic_spec(std::string_view text);
CohortIntermediate synthetic_cohort(const SyntheticSpec& spec);

}  // namespace multihit
