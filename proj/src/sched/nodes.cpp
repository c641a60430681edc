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

#include "multihit/sched/nodes.hpp"

#include <algorithm>
#include <chrono>

#include "multihit/error.hpp"

namespace multihit::sched {

std::vector<LambdaInterval> plan_partition(std::uint64_t lambda_total, std::size_t num_leaders) {
  if (num_leaders == 0) throw UsageError("plan_partition: need at least one leader");
  std::vector<LambdaInterval> parts;
  parts.reserve(num_leaders);
  const std::uint64_t base = lambda_total / num_leaders;
  const std::uint64_t extra = lambda_total % num_leaders;
  std::uint64_t start = 0;
  for (std::size_t l = 0; l < num_leaders; ++l) {
    const std::uint64_t size = base + (l < extra ? 1 : 0);
    parts.push_back({start, start + size});
    start += size;
  }
  return parts;
}

std::optional<std::size_t> steal_victim_select(std::size_t self, std::size_t num_leaders,
                                               std::mt19937_64& rng) {
  if (num_leaders < 2) return std::nullopt;
  std::size_t pick = static_cast<std::size_t>(rng() % (num_leaders - 1));
  if (pick >= self) ++pick;
  return pick;
}

std::optional<LambdaInterval> split_for_steal(LambdaInterval& queue) {
  if (queue.empty()) return std::nullopt;
  const std::uint64_t give = (queue.size() + 1) / 2;
  LambdaInterval donated{queue.end - give, queue.end};
  queue.end = donated.start;
  return donated;
}

TokenDecision token_rules(const LeaderStatus& leader, TokenState token, bool fresh) {
  TokenDecision d;
  d.token = token;
  d.token.holder = leader.index;
  if (!leader.idle) {
    d.action = TokenAction::kHold;
    return d;
  }
  const std::size_t next = (leader.index + 1) % leader.num_leaders;
  const TokenColor seen = leader.donated ? TokenColor::kBlack : token.color;
  if (leader.index != 0 || fresh) {
    d.action = TokenAction::kForward;
    d.token.color = seen;
    d.token.holder = next;
    return d;
  }
  // Root, token returning from a full circulation.
  if (seen == TokenColor::kBlack) {
    d.token.root_white_streak = 0;
  } else if (++d.token.root_white_streak >= 2) {
    d.action = TokenAction::kTerminate;
    return d;
  }
  d.action = TokenAction::kForward;
  d.token.color = TokenColor::kWhite;
  d.token.holder = next;
  return d;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint32_t packed_gene_count(const std::vector<std::uint8_t>& packed) {
  if (packed.size() < kPackedHeaderBytes) throw FormatError("setup: packed matrix truncated", 0);
  std::uint32_t g = 0;
  for (int i = 0; i < 4; ++i) g |= std::uint32_t{packed[8 + i]} << (8 * i);
  return g;
}

}  // namespace

LeaderNode::LeaderNode(std::size_t index, const SchedulerConfig& config, std::optional<Setup> root_setup)
    : index_(index),
      config_(config),
      self_(config.topology.leader_id(index)),
      setup_(std::move(root_setup)),
      rng_(mix_seed(config.seed, index)),
      retries_left_(config.steal_retries) {
  if (config.topology.leaders == 0 || config.topology.workers_per_leader == 0) {
    throw UsageError("topology counts must be >= 1");
  }
  if (config.chunk_size == 0) throw UsageError("chunk_size must be >= 1");
  if (index == 0 && !setup_) throw UsageError("root leader needs the round setup");
  for (std::size_t w = 0; w < config.topology.compute_workers(); ++w) {
    workers_.push_back(config.topology.worker_id(index, w));
  }
}

bool LeaderNode::late_traffic(const Envelope& env) const {
  const auto& topo = config_.topology;
  if (std::holds_alternative<StealRequest>(env.msg)) return topo.is_leader(env.from);
  if (const auto* reply = std::get_if<StealReply>(&env.msg)) return !reply->interval;
  if (std::holds_alternative<WorkRequest>(env.msg)) {
    return !topo.is_leader(env.from) && topo.group_of(env.from) == index_;
  }
  return false;
}

bool LeaderNode::idle() const {
  return started_ && queue_.empty() && outstanding_ == 0 && !steal_pending_;
}

void LeaderNode::send(ProcessId to, Message msg, std::vector<Envelope>& out) const {
  out.push_back(Envelope{self_, to, std::move(msg)});
}

std::vector<Envelope> LeaderNode::start() {
  std::vector<Envelope> out;
  if (!is_root()) return out;
  for (std::size_t l = 1; l < config_.topology.leaders; ++l) {
    send(config_.topology.leader_id(l), *setup_, out);
  }
  begin(*setup_, out);
  return out;
}

void LeaderNode::begin(const Setup& setup, std::vector<Envelope>& out) {
  started_ = true;
  const auto total = lambda_total(packed_gene_count(setup.packed_matrix), setup.hits);
  queue_ = plan_partition(total, config_.topology.leaders)[index_];
  for (auto w : workers_) send(w, setup, out);
  if (is_root()) {
    has_token_ = true;
    token_fresh_ = true;
    token_color_ = TokenColor::kWhite;
  }
  try_forward_token(out);
}

std::vector<Envelope> LeaderNode::on_message(const Envelope& env) {
  std::vector<Envelope> out;
  const auto& topo = config_.topology;
  const bool from_my_worker = !topo.is_leader(env.from) && topo.group_of(env.from) == index_;

  if (terminated_) {
    const auto* report = std::get_if<Report>(&env.msg);
    if (is_root() && report && topo.is_leader(env.from) && !done_) {
      fold_best(best_, report->best);
      stats_ += report->stats;
      if (++leader_reports_ == topo.leaders - 1) done_ = true;
    } else if (late_traffic(env)) {
      // Requests sent just before the token's last circulation; they carry no work.
    } else {
      ++faults_;
    }
    return out;
  }

  if (const auto* setup = std::get_if<Setup>(&env.msg)) {
    if (is_root() || started_ || env.from != topo.leader_id(0)) {
      ++faults_;
      return out;
    }
    setup_ = *setup;
    begin(*setup_, out);
  } else if (std::holds_alternative<WorkRequest>(env.msg) && from_my_worker) {
    on_work_request(env.from, out);
  } else if (std::holds_alternative<StealRequest>(env.msg) && topo.is_leader(env.from)) {
    on_steal_request(env.from, out);
  } else if (const auto* reply = std::get_if<StealReply>(&env.msg); reply && steal_pending_) {
    on_steal_reply(*reply, out);
  } else if (const auto* token = std::get_if<Token>(&env.msg)) {
    on_token(token->color, out);
  } else if (auto* report = std::get_if<Report>(&env.msg); report && from_my_worker && outstanding_ > 0) {
    on_report(env.from, *report, out);
  } else if (std::holds_alternative<Terminate>(env.msg) && !is_root()) {
    on_terminate(out);
    return out;
  } else {
    ++faults_;
    return out;
  }
  try_forward_token(out);
  return out;
}

void LeaderNode::on_work_request(ProcessId worker, std::vector<Envelope>& out) {
  waiting_.push_back({worker, false});
  serve_waiting(out);
}

void LeaderNode::serve_waiting(std::vector<Envelope>& out) {
  while (!waiting_.empty() && !queue_.empty()) {
    const auto size = std::min(config_.chunk_size, queue_.size());
    const LambdaInterval chunk{queue_.start, queue_.start + size};
    queue_.start += size;
    ++outstanding_;
    send(waiting_.front().worker, WorkGrant{chunk}, out);
    waiting_.pop_front();
  }
  if (queue_.empty()) maybe_steal(out);
  if (!steal_pending_) {
    for (auto& w : waiting_) {
      if (!w.notified) {
        w.notified = true;
        send(w.worker, NoWork{}, out);
      }
    }
  }
}

void LeaderNode::maybe_steal(std::vector<Envelope>& out) {
  if (!config_.stealing || steal_pending_ || !queue_.empty() || retries_left_ == 0) return;
  const auto victim = steal_victim_select(index_, config_.topology.leaders, rng_);
  if (!victim) return;
  --retries_left_;
  steal_pending_ = true;
  send(config_.topology.leader_id(*victim), StealRequest{}, out);
}

void LeaderNode::on_steal_request(ProcessId thief, std::vector<Envelope>& out) {
  auto donated = split_for_steal(queue_);
  if (donated) {
    donated_ = true;
    ++steals_served_;
  }
  send(thief, StealReply{donated}, out);
}

void LeaderNode::on_steal_reply(const StealReply& reply, std::vector<Envelope>& out) {
  steal_pending_ = false;
  if (reply.interval) {
    ++steals_initiated_;
    queue_ = *reply.interval;
    retries_left_ = config_.steal_retries;
  }
  serve_waiting(out);
}

void LeaderNode::on_token(TokenColor color, std::vector<Envelope>& out) {
  has_token_ = true;
  token_color_ = color;
  // Each visit grants a fresh steal budget so an idle group can pick up
  // work that appeared since its last attempts.
  if (started_ && queue_.empty() && !steal_pending_) {
    retries_left_ = config_.steal_retries;
    maybe_steal(out);
  }
}

void LeaderNode::on_report(ProcessId, Report report, std::vector<Envelope>&) {
  --outstanding_;
  fold_best(best_, std::move(report.best));
  stats_ += report.stats;
}

void LeaderNode::try_forward_token(std::vector<Envelope>& out) {
  if (!has_token_ || terminated_) return;
  const LeaderStatus status{index_, config_.topology.leaders, idle(), donated_};
  const auto d = token_rules(status, TokenState{token_color_, index_, white_streak_}, token_fresh_);
  switch (d.action) {
    case TokenAction::kHold:
      return;
    case TokenAction::kForward:
      donated_ = false;
      has_token_ = false;
      token_fresh_ = false;
      white_streak_ = d.token.root_white_streak;
      send(config_.topology.leader_id(d.token.holder), Token{d.token.color}, out);
      return;
    case TokenAction::kTerminate:
      has_token_ = false;
      for (std::size_t l = 1; l < config_.topology.leaders; ++l) {
        send(config_.topology.leader_id(l), Terminate{}, out);
      }
      on_terminate(out);
      return;
  }
}

void LeaderNode::on_terminate(std::vector<Envelope>& out) {
  terminated_ = true;
  for (auto w : workers_) send(w, Terminate{}, out);
  if (!is_root()) {
    send(config_.topology.leader_id(0), Report{best_, stats_}, out);
    done_ = true;
  } else if (config_.topology.leaders == 1) {
    done_ = true;
  }
}

std::vector<Envelope> WorkerNode::on_message(const Envelope& env) {
  std::vector<Envelope> out;
  if (done_ || env.from != leader_) {
    ++faults_;
    return out;
  }
  if (const auto* setup = std::get_if<Setup>(&env.msg)) {
    const auto m = setup_matrix(*setup);
    view_.emplace(m, setup->hits);
    alpha_ = setup->alpha;
    prune_ = setup->prune;
    metrics_.worker_id = self_;
    out.push_back(Envelope{self_, leader_, WorkRequest{}});
  } else if (const auto* grant = std::get_if<WorkGrant>(&env.msg); grant && view_) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = pdfs_best(*view_, grant->interval, alpha_, prune_);
    metrics_.busy_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++metrics_.chunks_processed;
    metrics_.visited += result.stats.visited;
    metrics_.pruned_combinations += result.stats.pruned_combinations;
    processed_.push_back(grant->interval);
    out.push_back(Envelope{self_, leader_, Report{std::move(result.best), result.stats}});
    out.push_back(Envelope{self_, leader_, WorkRequest{}});
  } else if (std::holds_alternative<NoWork>(env.msg)) {
    // Stay idle until the leader finds work or terminates the round.
  } else if (std::holds_alternative<Terminate>(env.msg)) {
    done_ = true;
  } else {
    ++faults_;
  }
  return out;
}

}  // namespace multihit::sched
