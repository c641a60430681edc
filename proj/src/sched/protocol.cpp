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

#include "multihit/sched/protocol.hpp"

#include <sstream>
#include <string>

#include "../byte_io.hpp"
#include "multihit/error.hpp"

namespace multihit::sched {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

enum Tag : std::uint8_t {
  kWorkRequest = 1,
  kWorkGrant = 2,
  kNoWork = 3,
  kStealRequest = 4,
  kStealReply = 5,
  kToken = 6,
  kTerminate = 7,
  kReport = 8,
  kSetup = 9,
};

void put_interval(detail::ByteWriter& w, const LambdaInterval& iv) {
  w.u64(iv.start);
  w.u64(iv.end);
}

LambdaInterval get_interval(detail::ByteReader& r) {
  LambdaInterval iv;
  const auto at = r.offset();
  iv.start = r.u64();
  iv.end = r.u64();
  if (iv.empty()) throw FormatError("frame: empty interval", at);
  return iv;
}

void encode_into(detail::ByteWriter& w, const Message& msg) {
  std::visit(Overloaded{
                 [&](const WorkRequest&) { w.u8(kWorkRequest); },
                 [&](const WorkGrant& m) {
                   w.u8(kWorkGrant);
                   put_interval(w, m.interval);
                 },
                 [&](const NoWork&) { w.u8(kNoWork); },
                 [&](const StealRequest&) { w.u8(kStealRequest); },
                 [&](const StealReply& m) {
                   w.u8(kStealReply);
                   w.u8(m.interval ? 1 : 0);
                   if (m.interval) put_interval(w, *m.interval);
                 },
                 [&](const Token& m) {
                   w.u8(kToken);
                   w.u8(static_cast<std::uint8_t>(m.color));
                 },
                 [&](const Terminate&) { w.u8(kTerminate); },
                 [&](const Report& m) {
                   w.u8(kReport);
                   w.u8(m.best ? 1 : 0);
                   if (m.best) {
                     w.u32(static_cast<std::uint32_t>(m.best->combo.size()));
                     for (auto g : m.best->combo) w.u32(g);
                     w.f64(m.best->score);
                   }
                   w.u64(m.stats.visited);
                   w.u64(m.stats.pruned_subtrees);
                   w.u64(m.stats.pruned_combinations);
                 },
                 [&](const Setup& m) {
                   w.u8(kSetup);
                   w.u32(m.hits);
                   w.f64(m.alpha);
                   w.u8(m.prune ? 1 : 0);
                   w.u32(static_cast<std::uint32_t>(m.packed_matrix.size()));
                   w.bytes(m.packed_matrix);
                   w.u32(static_cast<std::uint32_t>(m.mask_words.size()));
                   for (auto word : m.mask_words) w.u64(word);
                 },
             },
             msg);
}

Message decode_from(detail::ByteReader& r) {
  const auto tag = r.u8();
  switch (tag) {
    case kWorkRequest:
      return WorkRequest{};
    case kWorkGrant:
      return WorkGrant{get_interval(r)};
    case kNoWork:
      return NoWork{};
    case kStealRequest:
      return StealRequest{};
    case kStealReply: {
      StealReply m;
      if (r.u8() != 0) m.interval = get_interval(r);
      return m;
    }
    case kToken: {
      const auto at = r.offset();
      const auto color = r.u8();
      if (color > 1) throw FormatError("frame: bad token color", at);
      return Token{static_cast<TokenColor>(color)};
    }
    case kTerminate:
      return Terminate{};
    case kReport: {
      Report m;
      if (r.u8() != 0) {
        ScoredCombination best;
        const auto h = r.u32();
        if (h > r.remaining() / 4) throw FormatError("frame: combination length too large", r.offset());
        best.combo.resize(h);
        for (auto& g : best.combo) g = r.u32();
        best.score = r.f64();
        m.best = std::move(best);
      }
      m.stats.visited = r.u64();
      m.stats.pruned_subtrees = r.u64();
      m.stats.pruned_combinations = r.u64();
      return m;
    }
    case kSetup: {
      Setup m;
      m.hits = r.u32();
      m.alpha = r.f64();
      m.prune = r.u8() != 0;
      const auto n = r.u32();
      const auto bytes = r.bytes(n);
      m.packed_matrix.assign(bytes.begin(), bytes.end());
      const auto words = r.u32();
      if (words > r.remaining() / 8) throw FormatError("frame: mask too large", r.offset());
      m.mask_words.resize(words);
      for (auto& word : m.mask_words) word = r.u64();
      return m;
    }
    default:
      throw FormatError("frame: unknown tag " + std::to_string(tag), r.offset() - 1);
  }
}

}  // namespace

std::string_view message_name(const Message& msg) {
  static constexpr std::string_view kNames[] = {"WorkRequest", "WorkGrant", "NoWork",
                                                "StealRequest", "StealReply", "Token",
                                                "Terminate", "Report", "Setup"};
  return kNames[msg.index()];
}

std::vector<std::uint8_t> encode(const Message& msg) {
  detail::ByteWriter w;
  encode_into(w, msg);
  return w.take();
}

Message decode(std::span<const std::uint8_t> frame) {
  detail::ByteReader r(frame);
  auto msg = decode_from(r);
  if (r.remaining() != 0) throw FormatError("frame: trailing bytes", r.offset());
  return msg;
}

std::vector<std::uint8_t> encode_envelope(const Envelope& env) {
  detail::ByteWriter w;
  w.u32(0);  // patched below
  w.u32(env.from);
  w.u32(env.to);
  encode_into(w, env.msg);
  auto buf = w.take();
  const auto len = static_cast<std::uint32_t>(buf.size() - 4);
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(len >> (8 * i));
  return buf;
}

Envelope decode_envelope(std::span<const std::uint8_t> payload) {
  detail::ByteReader r(payload);
  Envelope env;
  env.from = r.u32();
  env.to = r.u32();
  env.msg = decode_from(r);
  if (r.remaining() != 0) throw FormatError("frame: trailing bytes", r.offset());
  return env;
}

Setup make_setup(const MutationMatrix& m, unsigned hits, double alpha, bool prune) {
  Setup s;
  s.hits = hits;
  s.alpha = alpha;
  s.prune = prune;
  std::ostringstream out(std::ios::binary);
  write_packed(m, out);
  const auto bytes = std::move(out).str();
  s.packed_matrix.assign(bytes.begin(), bytes.end());
  const auto mask = m.active_tumor_mask().words();
  s.mask_words.assign(mask.begin(), mask.end());
  return s;
}

MutationMatrix setup_matrix(const Setup& setup) {
  std::istringstream in(std::string(setup.packed_matrix.begin(), setup.packed_matrix.end()),
                        std::ios::binary);
  auto m = read_packed(in);
  BitRow mask(m.num_tumor());
  mask.assign_words(setup.mask_words);
  m.set_active_tumor_mask(std::move(mask));
  return m;
}

}  // namespace multihit::sched
