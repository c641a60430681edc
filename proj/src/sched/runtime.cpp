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

#include "multihit/sched/runtime.hpp"

#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "multihit/error.hpp"

namespace multihit::sched {

namespace {

using Clock = std::chrono::steady_clock;

class FirstError {
 public:
  void record(std::exception_ptr e, Transport& transport) {
    {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::move(e);
    }
    transport.close();
  }
  std::exception_ptr get() const { return error_; }

 private:
  std::mutex mu_;
  std::exception_ptr error_;
};

void send_all(Transport& transport, const std::vector<Envelope>& out) {
  for (const auto& env : out) transport.send(env);
}

}  // namespace

RoundResult run_round(const MutationMatrix& m, unsigned hits, double alpha, bool prune,
                      const SchedulerConfig& config, Transport& transport) {
  const auto& topo = config.topology;
  if (transport.endpoints() != topo.process_count()) {
    throw UsageError("run_round: transport has " + std::to_string(transport.endpoints()) +
                     " endpoints, topology needs " + std::to_string(topo.process_count()));
  }

  std::vector<LeaderNode> leaders;
  leaders.emplace_back(0, config, make_setup(m, hits, alpha, prune));
  for (std::size_t l = 1; l < topo.leaders; ++l) leaders.emplace_back(l, config);
  std::vector<WorkerNode> workers;
  for (std::size_t l = 0; l < topo.leaders; ++l) {
    for (std::size_t w = 0; w < topo.compute_workers(); ++w) {
      workers.emplace_back(topo.worker_id(l, w), topo.leader_id(l));
    }
  }
  std::vector<double> lifetimes(workers.size(), 0.0);

  FirstError error;
  const auto t0 = Clock::now();
  std::vector<std::thread> threads;
  for (auto& leader : leaders) {
    threads.emplace_back([&] {
      try {
        send_all(transport, leader.start());
        while (!leader.done()) send_all(transport, leader.on_message(transport.receive(leader.id())));
      } catch (...) {
        error.record(std::current_exception(), transport);
      }
    });
  }
  for (std::size_t i = 0; i < workers.size(); ++i) {
    threads.emplace_back([&, i] {
      auto& worker = workers[i];
      const auto start = Clock::now();
      try {
        while (!worker.done()) send_all(transport, worker.on_message(transport.receive(worker.id())));
      } catch (...) {
        error.record(std::current_exception(), transport);
      }
      lifetimes[i] = std::chrono::duration<double>(Clock::now() - start).count();
    });
  }
  for (auto& t : threads) t.join();
  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
  transport.close();

  if (auto e = error.get()) {
    try {
      std::rethrow_exception(e);
    } catch (const std::exception& ex) {
      throw TransportError(std::string("round aborted: ") + ex.what());
    }
  }

  RoundResult result;
  result.wall_seconds = wall;
  result.stats = leaders[0].stats();
  for (const auto& l : leaders) result.faults += l.faults();
  for (std::size_t i = 0; i < workers.size(); ++i) {
    auto row = workers[i].metrics();
    row.idle_seconds = std::max(0.0, lifetimes[i] - row.busy_seconds);
    result.metrics.push_back(row);
    result.faults += workers[i].faults();
    const auto& p = workers[i].processed();
    result.processed.insert(result.processed.end(), p.begin(), p.end());
  }
  for (std::size_t l = 0; l < topo.leaders; ++l) {
    auto& first = result.metrics[l * topo.compute_workers()];
    first.steals_initiated = leaders[l].steals_initiated();
    first.steals_served = leaders[l].steals_served();
  }
  if (const auto& best = leaders[0].best()) {
    auto full = score(best->combo, m, alpha);
    if (full.score != best->score) {
      throw Error("run_round: reduced score disagrees with coordinator rescoring");
    }
    result.best = std::move(full);
  }
  return result;
}

RoundResult run_round(const MutationMatrix& m, unsigned hits, double alpha, bool prune,
                      const SchedulerConfig& config, TransportKind kind) {
  auto transport = make_transport(kind, config.topology.process_count());
  return run_round(m, hits, alpha, prune, config, *transport);
}

SearchResult ScheduledExecutor::argmax(const MutationMatrix& m, unsigned hits, double alpha) {
  auto round = run_round(m, hits, alpha, prune_, config_, kind_);
  round_metrics_.push_back(std::move(round.metrics));
  faults_ += round.faults;
  return {std::move(round.best), round.stats};
}

}  // namespace multihit::sched
