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
#include <utility>
#include <vector>

namespace multihit {

using GeneIndex = std::uint32_t;

// Fixed-length bit vector over 64-bit words. Bits at positions >= size() are
// always zero, so word-level popcounts never need masking.
class BitRow {
 public:
  BitRow() = default;
  explicit BitRow(std::size_t bit_len, bool value = false);

  static std::size_t words_for(std::size_t bit_len) { return (bit_len + 63) / 64; }

  std::size_t size() const { return bit_len_; }
  std::size_t word_count() const { return words_.size(); }
  std::span<const std::uint64_t> words() const { return words_; }

  bool test(std::size_t pos) const;
  void set(std::size_t pos, bool value = true);
  void reset(std::size_t pos) { set(pos, false); }
  void fill(bool value);

  std::size_t count() const;
  bool none() const;

  // Replaces the word storage. Throws UsageError if the word count is wrong or
  // any padding bit is set.
  void assign_words(std::span<const std::uint64_t> words);

  friend bool operator==(const BitRow&, const BitRow&) = default;

 private:
  friend void and_into(BitRow& dst, const BitRow& src);

  std::vector<std::uint64_t> words_;
  std::size_t bit_len_ = 0;
};

// dst &= src. Throws UsageError on length mismatch.
void and_into(BitRow& dst, const BitRow& src);

// Binary genes x samples matrix. Tumor columns occupy bit positions
// [0, num_tumor), normal columns [num_tumor, num_tumor + num_normal).
//
// The only mutable state is the active tumor mask, which the greedy cover
// clears as samples become covered. Columns are never physically deleted so
// gene indices and lambda decoding stay stable across rounds.
class MutationMatrix {
 public:
  MutationMatrix() = default;
  MutationMatrix(std::vector<BitRow> rows, std::size_t num_tumor, std::size_t num_normal,
                 std::vector<std::string> gene_ids);

  std::size_t gene_count() const { return rows_.size(); }
  std::size_t num_tumor() const { return num_tumor_; }
  std::size_t num_normal() const { return num_normal_; }
  std::size_t num_samples() const { return num_tumor_ + num_normal_; }

  const BitRow& row(GeneIndex g) const { return rows_.at(g); }
  const std::vector<BitRow>& rows() const { return rows_; }
  const std::vector<std::string>& gene_ids() const { return gene_ids_; }

  const BitRow& active_tumor_mask() const { return active_tumor_mask_; }
  std::size_t active_tumor_count() const { return active_tumor_mask_.count(); }
  void set_active_tumor_mask(BitRow mask);
  // Clears every tumor bit set in `covered` (bit_len == num_tumor).
  void clear_covered(const BitRow& covered);
  void reset_mask();

  // Tumor-column count of row g, ignoring the active mask.
  std::size_t tumor_popcount(GeneIndex g) const;

 private:
  std::vector<BitRow> rows_;
  std::size_t num_tumor_ = 0;
  std::size_t num_normal_ = 0;
  std::vector<std::string> gene_ids_;
  BitRow active_tumor_mask_;
};

// True iff y has no bit set at an active tumor position.
bool tumor_intersection_empty(const BitRow& y, const MutationMatrix& m);

// Index (after sparsity sort) -> gene name.
class GeneMap {
 public:
  GeneMap() = default;
  explicit GeneMap(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& lookup(GeneIndex index) const;
  const std::vector<std::string>& names() const { return names_; }

  // One "index<TAB>name\n" line per gene, in index order.
  void write(std::ostream& out) const;
  static GeneMap read(std::istream& in);

  friend bool operator==(const GeneMap&, const GeneMap&) = default;

 private:
  std::vector<std::string> names_;
};

// Rows ordered by ascending tumor popcount, ties by original index.
std::pair<MutationMatrix, GeneMap> sort_by_sparsity(const MutationMatrix& m);

// Packed little-endian binary layout:
//   "MHWC" | u32 version=1 | u32 G | u32 num_tumor | u32 num_normal |
//   G rows x ceil((num_tumor + num_normal) / 64) u64 words
// The active mask and gene names are not stored; read_packed names genes by
// their decimal index.
inline constexpr std::uint32_t kPackedVersion = 1;
inline constexpr std::size_t kPackedHeaderBytes = 20;

void write_packed(const MutationMatrix& m, std::ostream& sink);
MutationMatrix read_packed(std::istream& source);

void save_packed(const MutationMatrix& m, const std::string& path);
MutationMatrix load_packed(const std::string& path);
// Loads the matrix and attaches names from the gene map file.
MutationMatrix load_packed(const std::string& path, const std::string& gene_map_path);

}  // namespace multihit
