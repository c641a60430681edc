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

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "multihit/search.hpp"

namespace multihit::sched {

using ProcessId = std::uint32_t;

// Worker -> leader: give me the next chunk.
struct WorkRequest {};
// Leader -> worker. Never empty.
struct WorkGrant {
  LambdaInterval interval;
};
// Leader -> worker: nothing right now; wait for a grant or Terminate.
struct NoWork {};
// Leader -> leader.
struct StealRequest {};
// Leader -> leader: upper half of the victim's queue, absent when it had none.
struct StealReply {
  std::optional<LambdaInterval> interval;
};

enum class TokenColor : std::uint8_t { kWhite = 0, kBlack = 1 };

struct Token {
  TokenColor color = TokenColor::kWhite;
};
struct Terminate {};
// Worker -> leader after every chunk, and leader -> root after Terminate.
struct Report {
  std::optional<ScoredCombination> best;
  SearchStats stats;
};
// Root -> leaders -> workers: round parameters plus the packed matrix and the
// active tumor mask.
struct Setup {
  std::uint32_t hits = 0;
  double alpha = 0.0;
  bool prune = true;
  std::vector<std::uint8_t> packed_matrix;
  std::vector<std::uint64_t> mask_words;
};

using Message =
    std::variant<WorkRequest, WorkGrant, NoWork, StealRequest, StealReply, Token, Terminate, Report, Setup>;

struct Envelope {
  ProcessId from = 0;
  ProcessId to = 0;
  Message msg;
};

std::string_view message_name(const Message& msg);

// Frame: 1-byte tag, then fixed-width little-endian fields.
//   WorkRequest=1, WorkGrant=2 (u64 start, u64 end), NoWork=3, StealRequest=4,
//   StealReply=5 (u8 present [, u64 start, u64 end]), Token=6 (u8 color),
//   Terminate=7,
//   Report=8 (u8 present [, u32 h, h x u32 gene, f64 score],
//             u64 visited, u64 pruned_subtrees, u64 pruned_combinations),
//   Setup=9 (u32 hits, f64 alpha, u8 prune, u32 n, n bytes packed matrix,
//            u32 m, m x u64 mask words)
// Report carries only the gene tuple and score of its best combination.
std::vector<std::uint8_t> encode(const Message& msg);
Message decode(std::span<const std::uint8_t> frame);

// Envelope frame used on sockets: u32 payload length, u32 from, u32 to, then
// the message frame. The length counts everything after itself.
std::vector<std::uint8_t> encode_envelope(const Envelope& env);
Envelope decode_envelope(std::span<const std::uint8_t> payload);

Setup make_setup(const MutationMatrix& m, unsigned hits, double alpha, bool prune);
// Rebuilds the matrix (genes named by index) with the shipped mask applied.
MutationMatrix setup_matrix(const Setup& setup);

}  // namespace multihit::sched
