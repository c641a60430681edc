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

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <string_view>
#include <vector>

#include "multihit/sched/protocol.hpp"

namespace multihit::sched {

// Point-to-point message delivery between numbered endpoints. Messages from
// one sender to one receiver arrive in send order. After close(), blocked
// and future receive() calls throw TransportError.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::size_t endpoints() const = 0;
  virtual void send(const Envelope& env) = 0;
  virtual Envelope receive(ProcessId self) = 0;
  virtual void close() = 0;
};

class Mailbox {
 public:
  void push(Envelope env);
  Envelope pop();
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Envelope> queue_;
  bool closed_ = false;
};

// In-process queues; messages are moved, never serialized.
class ChannelTransport final : public Transport {
 public:
  explicit ChannelTransport(std::size_t endpoints);

  std::size_t endpoints() const override { return boxes_.size(); }
  void send(const Envelope& env) override;
  Envelope receive(ProcessId self) override;
  void close() override;

 private:
  std::vector<std::unique_ptr<Mailbox>> boxes_;
};

// Loopback TCP. Each endpoint listens on 127.0.0.1 and runs a reader thread;
// each ordered (from, to) pair gets one connection carrying
// length-prefixed envelope frames (see encode_envelope).
class SocketTransport final : public Transport {
 public:
  explicit SocketTransport(std::size_t endpoints);
  ~SocketTransport() override;

  std::size_t endpoints() const override;
  void send(const Envelope& env) override;
  Envelope receive(ProcessId self) override;
  void close() override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

enum class TransportKind { kChannel, kSocket };

TransportKind parse_transport_kind(std::string_view name);
std::unique_ptr<Transport> make_transport(TransportKind kind, std::size_t endpoints);

}  // namespace multihit::sched
