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

#include "multihit/bitmat.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "byte_io.hpp"
#include "multihit/error.hpp"

namespace multihit {

namespace {

std::uint64_t tail_mask(std::size_t bit_len) {
  const std::size_t rem = bit_len % 64;
  return rem == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << rem) - 1;
}

}  // namespace

BitRow::BitRow(std::size_t bit_len, bool value)
    : words_(words_for(bit_len), value ? ~std::uint64_t{0} : 0), bit_len_(bit_len) {
  if (value && !words_.empty()) words_.back() &= tail_mask(bit_len_);
}

bool BitRow::test(std::size_t pos) const {
  if (pos >= bit_len_) throw UsageError("BitRow::test: position out of range");
  return (words_[pos / 64] >> (pos % 64)) & 1U;
}

void BitRow::set(std::size_t pos, bool value) {
  if (pos >= bit_len_) throw UsageError("BitRow::set: position out of range");
  const std::uint64_t bit = std::uint64_t{1} << (pos % 64);
  if (value) {
    words_[pos / 64] |= bit;
  } else {
    words_[pos / 64] &= ~bit;
  }
}

void BitRow::fill(bool value) {
  std::fill(words_.begin(), words_.end(), value ? ~std::uint64_t{0} : 0);
  if (value && !words_.empty()) words_.back() &= tail_mask(bit_len_);
}

std::size_t BitRow::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitRow::none() const {
  return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
}

void BitRow::assign_words(std::span<const std::uint64_t> words) {
  if (words.size() != words_.size()) throw UsageError("BitRow::assign_words: word count mismatch");
  if (!words.empty() && (words.back() & ~tail_mask(bit_len_)) != 0) {
    throw UsageError("BitRow::assign_words: padding bits set");
  }
  std::copy(words.begin(), words.end(), words_.begin());
}

void and_into(BitRow& dst, const BitRow& src) {
  if (dst.bit_len_ != src.bit_len_) throw UsageError("and_into: length mismatch");
  for (std::size_t i = 0; i < dst.words_.size(); ++i) dst.words_[i] &= src.words_[i];
}

MutationMatrix::MutationMatrix(std::vector<BitRow> rows, std::size_t num_tumor,
                               std::size_t num_normal, std::vector<std::string> gene_ids)
    : rows_(std::move(rows)),
      num_tumor_(num_tumor),
      num_normal_(num_normal),
      gene_ids_(std::move(gene_ids)),
      active_tumor_mask_(num_tumor, true) {
  if (gene_ids_.empty() && !rows_.empty()) {
    gene_ids_.reserve(rows_.size());
    for (std::size_t g = 0; g < rows_.size(); ++g) gene_ids_.push_back(std::to_string(g));
  }
  if (gene_ids_.size() != rows_.size()) {
    throw UsageError("MutationMatrix: gene_ids size does not match row count");
  }
  for (const auto& r : rows_) {
    if (r.size() != num_samples()) throw UsageError("MutationMatrix: row length mismatch");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : gene_ids_) {
    if (id.empty()) throw UsageError("MutationMatrix: empty gene id");
    if (!seen.insert(id).second) throw UsageError("MutationMatrix: duplicate gene id " + id);
  }
}

void MutationMatrix::set_active_tumor_mask(BitRow mask) {
  if (mask.size() != num_tumor_) throw UsageError("set_active_tumor_mask: length mismatch");
  active_tumor_mask_ = std::move(mask);
}

void MutationMatrix::clear_covered(const BitRow& covered) {
  if (covered.size() != num_tumor_) throw UsageError("clear_covered: length mismatch");
  for (std::size_t s = 0; s < num_tumor_; ++s) {
    if (covered.test(s)) active_tumor_mask_.reset(s);
  }
}

void MutationMatrix::reset_mask() { active_tumor_mask_.fill(true); }

std::size_t MutationMatrix::tumor_popcount(GeneIndex g) const {
  const auto words = rows_.at(g).words();
  std::size_t n = 0;
  const std::size_t full = num_tumor_ / 64;
  for (std::size_t i = 0; i < full; ++i) n += std::popcount(words[i]);
  if (num_tumor_ % 64 != 0) n += std::popcount(words[full] & tail_mask(num_tumor_));
  return n;
}

bool tumor_intersection_empty(const BitRow& y, const MutationMatrix& m) {
  if (y.size() != m.num_samples()) throw UsageError("tumor_intersection_empty: length mismatch");
  // The mask's padding is zero, so ANDing word-by-word drops normal columns.
  const auto mask = m.active_tumor_mask().words();
  const auto yw = y.words();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if ((yw[i] & mask[i]) != 0) return false;
  }
  return true;
}

GeneMap::GeneMap(std::vector<std::string> names) : names_(std::move(names)) {}

const std::string& GeneMap::lookup(GeneIndex index) const {
  if (index >= names_.size()) {
    throw UsageError("GeneMap::lookup: index " + std::to_string(index) + " out of range");
  }
  return names_[index];
}

void GeneMap::write(std::ostream& out) const {
  for (std::size_t i = 0; i < names_.size(); ++i) out << i << '\t' << names_[i] << '\n';
}

GeneMap GeneMap::read(std::istream& in) {
  std::vector<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 1 == line.size()) {
      throw FormatError("gene map: expected index<TAB>name", lineno);
    }
    std::size_t index = 0;
    try {
      std::size_t used = 0;
      index = std::stoul(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw FormatError("gene map: bad index", lineno);
    }
    if (index != names.size()) throw FormatError("gene map: indices must be 0..G-1 in order", lineno);
    names.push_back(line.substr(tab + 1));
  }
  return GeneMap(std::move(names));
}

std::pair<MutationMatrix, GeneMap> sort_by_sparsity(const MutationMatrix& m) {
  std::vector<GeneIndex> order(m.gene_count());
  std::iota(order.begin(), order.end(), GeneIndex{0});
  std::vector<std::size_t> key(m.gene_count());
  for (GeneIndex g = 0; g < m.gene_count(); ++g) key[g] = m.tumor_popcount(g);
  std::stable_sort(order.begin(), order.end(),
                   [&](GeneIndex a, GeneIndex b) { return key[a] < key[b]; });

  std::vector<BitRow> rows;
  std::vector<std::string> ids;
  rows.reserve(order.size());
  ids.reserve(order.size());
  for (auto g : order) {
    rows.push_back(m.row(g));
    ids.push_back(m.gene_ids()[g]);
  }
  MutationMatrix sorted(std::move(rows), m.num_tumor(), m.num_normal(), ids);
  sorted.set_active_tumor_mask(m.active_tumor_mask());
  return {std::move(sorted), GeneMap(std::move(ids))};
}

void write_packed(const MutationMatrix& m, std::ostream& sink) {
  detail::ByteWriter w;
  for (char c : {'M', 'H', 'W', 'C'}) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kPackedVersion);
  w.u32(static_cast<std::uint32_t>(m.gene_count()));
  w.u32(static_cast<std::uint32_t>(m.num_tumor()));
  w.u32(static_cast<std::uint32_t>(m.num_normal()));
  for (const auto& row : m.rows()) {
    for (auto word : row.words()) w.u64(word);
  }
  const auto& buf = w.buffer();
  sink.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!sink) throw Error("write_packed: stream write failed");
}

MutationMatrix read_packed(std::istream& source) {
  const std::vector<std::uint8_t> data{std::istreambuf_iterator<char>(source),
                                       std::istreambuf_iterator<char>()};
  detail::ByteReader r(data);
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), "MHWC")) throw FormatError("bad magic", 0);
  const auto version = r.u32();
  if (version != kPackedVersion) {
    throw FormatError("unsupported version " + std::to_string(version), 4);
  }
  const std::size_t genes = r.u32();
  const std::size_t num_tumor = r.u32();
  const std::size_t num_normal = r.u32();
  const std::size_t bits = num_tumor + num_normal;
  const std::size_t words = BitRow::words_for(bits);

  std::vector<BitRow> rows;
  rows.reserve(genes);
  std::vector<std::uint64_t> buf(words);
  for (std::size_t g = 0; g < genes; ++g) {
    const std::size_t row_offset = r.offset();
    for (auto& word : buf) word = r.u64();
    BitRow row(bits);
    try {
      row.assign_words(buf);
    } catch (const UsageError&) {
      throw FormatError("non-zero padding bits in row " + std::to_string(g), row_offset);
    }
    rows.push_back(std::move(row));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last row", r.offset());
  return MutationMatrix(std::move(rows), num_tumor, num_normal, {});
}

void save_packed(const MutationMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_packed(m, out);
}

MutationMatrix load_packed(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_packed(in);
}

MutationMatrix load_packed(const std::string& path, const std::string& gene_map_path) {
  auto m = load_packed(path);
  std::ifstream in(gene_map_path);
  if (!in) throw ConfigError("cannot open " + gene_map_path);
  auto map = GeneMap::read(in);
  if (map.size() != m.gene_count()) {
    throw ConfigError("gene map has " + std::to_string(map.size()) + " entries, matrix has " +
                      std::to_string(m.gene_count()) + " genes");
  }
  std::vector<BitRow> rows = m.rows();
  return MutationMatrix(std::move(rows), m.num_tumor(), m.num_normal(), map.names());
}

}  // namespace multihit
