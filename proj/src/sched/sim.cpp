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

#include "multihit/sched/sim.hpp"

#include <deque>
#include <map>
#include <random>
#include <utility>

#include "multihit/error.hpp"

namespace multihit::sched {

SimResult simulate_round(const MutationMatrix& m, unsigned hits, double alpha, bool prune,
                         const SchedulerConfig& config, const SimOptions& options) {
  const auto& topo = config.topology;
  std::vector<LeaderNode> leaders;
  std::vector<WorkerNode> workers;
  leaders.emplace_back(0, config, make_setup(m, hits, alpha, prune));
  for (std::size_t l = 1; l < topo.leaders; ++l) leaders.emplace_back(l, config);
  for (std::size_t l = 0; l < topo.leaders; ++l) {
    for (std::size_t w = 0; w < topo.compute_workers(); ++w) {
      workers.emplace_back(topo.worker_id(l, w), topo.leader_id(l));
    }
  }
  auto worker_slot = [&](ProcessId p) {
    return topo.group_of(p) * topo.compute_workers() + (p % topo.group_size()) - 1;
  };

  std::map<std::pair<ProcessId, ProcessId>, std::deque<Message>> channels;
  std::vector<std::pair<ProcessId, ProcessId>> busy;  // channels with pending messages
  SimResult result;
  const std::uint64_t total = lambda_total(m.gene_count(), hits);
  std::uint64_t processed_lambda = 0;

  auto post = [&](std::vector<Envelope> out) {
    for (auto& env : out) {
      if (std::holds_alternative<Terminate>(env.msg) && topo.is_leader(env.from) &&
          processed_lambda != total) {
        result.premature = true;
      }
      const auto key = std::make_pair(env.from, env.to);
      auto& q = channels[key];
      if (q.empty()) busy.push_back(key);
      if (options.serialize) {
        const auto frame = encode_envelope(env);
        q.push_back(decode_envelope(std::span(frame).subspan(4)).msg);
      } else {
        q.push_back(std::move(env.msg));
      }
    }
  };

  post(leaders[0].start());
  std::mt19937_64 rng(options.interleaving_seed);
  while (!busy.empty()) {
    if (++result.steps > options.max_steps) break;
    const auto pick = static_cast<std::size_t>(rng() % busy.size());
    const auto key = busy[pick];
    auto& q = channels[key];
    Envelope env{key.first, key.second, std::move(q.front())};
    q.pop_front();
    if (q.empty()) {
      busy[pick] = busy.back();
      busy.pop_back();
    }
    if (std::holds_alternative<Token>(env.msg)) {
      ++result.token_hops;
      ++result.token_hops_after_last_chunk;
    }
    if (topo.is_leader(env.to)) {
      post(leaders[topo.group_of(env.to)].on_message(env));
    } else {
      auto& w = workers[worker_slot(env.to)];
      const auto before = w.processed().size();
      post(w.on_message(env));
      if (w.processed().size() != before) {
        processed_lambda += w.processed().back().size();
        result.token_hops_after_last_chunk = 0;
      }
    }
  }

  result.terminated = true;
  for (const auto& l : leaders) {
    result.terminated = result.terminated && l.done();
    result.faults += l.faults();
    result.steals += l.steals_initiated();
  }
  for (const auto& w : workers) {
    result.terminated = result.terminated && w.done();
    result.faults += w.faults();
    result.processed.insert(result.processed.end(), w.processed().begin(), w.processed().end());
    result.metrics.push_back(w.metrics());
  }
  for (std::size_t l = 0; l < topo.leaders; ++l) {
    auto& first = result.metrics[l * topo.compute_workers()];
    first.steals_initiated = leaders[l].steals_initiated();
    first.steals_served = leaders[l].steals_served();
  }
  result.best = leaders[0].best();
  result.stats = leaders[0].stats();
  return result;
}

}  // namespace multihit::sched
