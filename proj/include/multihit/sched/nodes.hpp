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
#include <deque>
#include <optional>
#include <random>
#include <vector>

#include "multihit/metrics.hpp"
#include "multihit/sched/protocol.hpp"
#include "multihit/search.hpp"

namespace multihit::sched {

// Process layout: leader l has id l * group_size(); its workers follow it.
// With leader_computes an extra worker is attached to every group.
struct Topology {
  std::size_t leaders = 1;
  std::size_t workers_per_leader = 1;
  bool leader_computes = false;

  std::size_t compute_workers() const { return workers_per_leader + (leader_computes ? 1 : 0); }
  std::size_t group_size() const { return 1 + compute_workers(); }
  std::size_t process_count() const { return leaders * group_size(); }
  ProcessId leader_id(std::size_t l) const { return static_cast<ProcessId>(l * group_size()); }
  ProcessId worker_id(std::size_t l, std::size_t w) const {
    return static_cast<ProcessId>(l * group_size() + 1 + w);
  }
  bool is_leader(ProcessId p) const { return p % group_size() == 0; }
  std::size_t group_of(ProcessId p) const { return p / group_size(); }
};

struct SchedulerConfig {
  Topology topology;
  std::uint64_t chunk_size = 1024;
  std::uint64_t seed = 1;
  bool stealing = true;
  unsigned steal_retries = 3;
};

// Contiguous, disjoint, covering; sizes differ by at most one, larger first.
std::vector<LambdaInterval> plan_partition(std::uint64_t lambda_total, std::size_t num_leaders);

// Uniform over leaders other than `self`; nullopt when there is no peer.
std::optional<std::size_t> steal_victim_select(std::size_t self, std::size_t num_leaders,
                                               std::mt19937_64& rng);

// Victim side of a steal: donates the upper ceil(n/2) of the queue.
std::optional<LambdaInterval> split_for_steal(LambdaInterval& queue);

struct TokenState {
  TokenColor color = TokenColor::kWhite;
  std::size_t holder = 0;
  unsigned root_white_streak = 0;
};

struct LeaderStatus {
  std::size_t index = 0;
  std::size_t num_leaders = 1;
  bool idle = false;
  bool donated = false;  // donated since the token last left this leader
};

enum class TokenAction { kHold, kForward, kTerminate };

struct TokenDecision {
  TokenAction action = TokenAction::kHold;
  TokenState token;  // state after the decision; holder is the next leader on forward
};

// Token arriving at (or created by, when `fresh`) a leader. Non-root leaders
// forward once idle, blackening on a recent donation. The root evaluates a
// returning token: black resets the streak and recirculates white; white
// increments the streak, and two in a row terminate. A forwarding decision
// consumes the donated flag.
TokenDecision token_rules(const LeaderStatus& leader, TokenState token, bool fresh = false);

class LeaderNode {
 public:
  // The root (index 0) receives the matrix; other leaders get it via Setup.
  LeaderNode(std::size_t index, const SchedulerConfig& config, std::optional<Setup> root_setup = {});

  std::vector<Envelope> start();
  std::vector<Envelope> on_message(const Envelope& env);

  bool done() const { return done_; }
  bool terminated() const { return terminated_; }
  bool is_root() const { return index_ == 0; }
  ProcessId id() const { return self_; }
  const std::optional<ScoredCombination>& best() const { return best_; }
  const SearchStats& stats() const { return stats_; }
  std::uint64_t steals_initiated() const { return steals_initiated_; }
  std::uint64_t steals_served() const { return steals_served_; }
  std::uint64_t faults() const { return faults_; }
  const LambdaInterval& queue() const { return queue_; }
  bool idle() const;

 private:
  void begin(const Setup& setup, std::vector<Envelope>& out);
  void on_work_request(ProcessId worker, std::vector<Envelope>& out);
  void on_steal_request(ProcessId thief, std::vector<Envelope>& out);
  void on_steal_reply(const StealReply& reply, std::vector<Envelope>& out);
  void on_token(TokenColor color, std::vector<Envelope>& out);
  void on_report(ProcessId from, Report report, std::vector<Envelope>& out);
  void on_terminate(std::vector<Envelope>& out);

  bool late_traffic(const Envelope& env) const;
  void maybe_steal(std::vector<Envelope>& out);
  void serve_waiting(std::vector<Envelope>& out);
  void try_forward_token(std::vector<Envelope>& out);
  void send(ProcessId to, Message msg, std::vector<Envelope>& out) const;

  std::size_t index_;
  SchedulerConfig config_;
  ProcessId self_;
  std::vector<ProcessId> workers_;
  std::optional<Setup> setup_;
  std::mt19937_64 rng_;

  bool started_ = false;
  LambdaInterval queue_;
  std::uint64_t outstanding_ = 0;
  struct Waiting {
    ProcessId worker;
    bool notified;
  };
  std::deque<Waiting> waiting_;
  bool steal_pending_ = false;
  unsigned retries_left_ = 0;
  bool donated_ = false;

  bool has_token_ = false;
  bool token_fresh_ = false;
  TokenColor token_color_ = TokenColor::kWhite;
  unsigned white_streak_ = 0;

  bool terminated_ = false;
  bool done_ = false;
  std::size_t leader_reports_ = 0;

  std::optional<ScoredCombination> best_;
  SearchStats stats_;
  std::uint64_t steals_initiated_ = 0;
  std::uint64_t steals_served_ = 0;
  std::uint64_t faults_ = 0;
};

class WorkerNode {
 public:
  WorkerNode(ProcessId self, ProcessId leader) : self_(self), leader_(leader) {}

  std::vector<Envelope> on_message(const Envelope& env);

  bool done() const { return done_; }
  ProcessId id() const { return self_; }
  const RunMetrics& metrics() const { return metrics_; }
  const std::vector<LambdaInterval>& processed() const { return processed_; }
  std::uint64_t faults() const { return faults_; }

 private:
  ProcessId self_;
  ProcessId leader_;
  std::optional<SearchView> view_;
  double alpha_ = 0.1;
  bool prune_ = true;
  bool done_ = false;
  RunMetrics metrics_;
  std::vector<LambdaInterval> processed_;
  std::uint64_t faults_ = 0;
};

}  // namespace multihit::sched
