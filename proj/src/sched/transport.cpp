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

#include "multihit/sched/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <string>
#include <thread>

#include "multihit/error.hpp"

namespace multihit::sched {

void Mailbox::push(Envelope env) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(env));
  }
  cv_.notify_one();
}

Envelope Mailbox::pop() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
  if (closed_) throw TransportError("transport closed");
  auto env = std::move(queue_.front());
  queue_.pop_front();
  return env;
}

void Mailbox::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

ChannelTransport::ChannelTransport(std::size_t endpoints) {
  for (std::size_t i = 0; i < endpoints; ++i) boxes_.push_back(std::make_unique<Mailbox>());
}

void ChannelTransport::send(const Envelope& env) {
  if (env.to >= boxes_.size()) throw TransportError("send: no endpoint " + std::to_string(env.to));
  boxes_[env.to]->push(env);
}

Envelope ChannelTransport::receive(ProcessId self) { return boxes_.at(self)->pop(); }

void ChannelTransport::close() {
  for (auto& b : boxes_) b->close();
}

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const auto w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      sys_fail("socket send");
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

}  // namespace

struct SocketTransport::Impl {
  struct Endpoint {
    int listener = -1;
    int wake[2] = {-1, -1};
    std::uint16_t port = 0;
    Mailbox box;
    std::thread reader;
  };

  std::vector<std::unique_ptr<Endpoint>> eps;
  std::mutex conn_mu;
  std::map<std::pair<ProcessId, ProcessId>, int> conns;
  std::map<std::pair<ProcessId, ProcessId>, std::unique_ptr<std::mutex>> conn_locks;
  std::atomic<bool> closed{false};
  std::mutex close_mu;

  explicit Impl(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      auto ep = std::make_unique<Endpoint>();
      ep->listener = ::socket(AF_INET, SOCK_STREAM, 0);
      if (ep->listener < 0) sys_fail("socket");
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
      addr.sin_port = 0;
      if (::bind(ep->listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) sys_fail("bind");
      if (::listen(ep->listener, 64) < 0) sys_fail("listen");
      socklen_t len = sizeof addr;
      if (::getsockname(ep->listener, reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
        sys_fail("getsockname");
      }
      ep->port = ntohs(addr.sin_port);
      if (::pipe(ep->wake) < 0) sys_fail("pipe");
      eps.push_back(std::move(ep));
    }
    for (auto& ep : eps) ep->reader = std::thread([this, e = ep.get()] { read_loop(*e); });
  }

  ~Impl() { shutdown(); }

  void read_loop(Endpoint& ep) {
    struct Conn {
      int fd;
      std::vector<std::uint8_t> buf;
    };
    std::vector<Conn> open;
    try {
      while (true) {
        std::vector<pollfd> fds;
        fds.push_back({ep.wake[0], POLLIN, 0});
        fds.push_back({ep.listener, POLLIN, 0});
        for (auto& c : open) fds.push_back({c.fd, POLLIN, 0});
        if (::poll(fds.data(), fds.size(), -1) < 0) {
          if (errno == EINTR) continue;
          sys_fail("poll");
        }
        if (fds[0].revents) break;
        if (fds[1].revents & POLLIN) {
          const int fd = ::accept(ep.listener, nullptr, nullptr);
          if (fd < 0) sys_fail("accept");
          open.push_back({fd, {}});
        }
        for (std::size_t i = 2; i < fds.size(); ++i) {
          if (!fds[i].revents) continue;
          auto& c = open[i - 2];
          std::uint8_t chunk[4096];
          const auto r = ::recv(c.fd, chunk, sizeof chunk, 0);
          if (r < 0 && errno == EINTR) continue;
          if (r <= 0) {
            ::close(c.fd);
            c.fd = -1;
            continue;
          }
          c.buf.insert(c.buf.end(), chunk, chunk + r);
          std::size_t pos = 0;
          while (c.buf.size() - pos >= 4) {
            std::uint32_t len = 0;
            for (int k = 0; k < 4; ++k) len |= std::uint32_t{c.buf[pos + k]} << (8 * k);
            if (c.buf.size() - pos - 4 < len) break;
            ep.box.push(decode_envelope(std::span(c.buf).subspan(pos + 4, len)));
            pos += 4 + len;
          }
          c.buf.erase(c.buf.begin(), c.buf.begin() + static_cast<std::ptrdiff_t>(pos));
        }
        std::erase_if(open, [](const Conn& c) { return c.fd < 0; });
      }
    } catch (const std::exception&) {
      // A corrupt frame or socket failure poisons this endpoint.
      ep.box.close();
    }
    for (auto& c : open) {
      if (c.fd >= 0) ::close(c.fd);
    }
  }

  int connection(ProcessId from, ProcessId to, std::mutex*& lock) {
    std::lock_guard guard(conn_mu);
    const auto key = std::make_pair(from, to);
    auto& l = conn_locks[key];
    if (!l) l = std::make_unique<std::mutex>();
    lock = l.get();
    if (auto it = conns.find(key); it != conns.end()) return it->second;
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) sys_fail("socket");
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(eps[to]->port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
      ::close(fd);
      sys_fail("connect");
    }
    conns[key] = fd;
    return fd;
  }

  void send(const Envelope& env) {
    if (closed) throw TransportError("transport closed");
    if (env.to >= eps.size()) throw TransportError("send: no endpoint " + std::to_string(env.to));
    std::mutex* lock = nullptr;
    const int fd = connection(env.from, env.to, lock);
    const auto frame = encode_envelope(env);
    std::lock_guard guard(*lock);
    write_all(fd, frame.data(), frame.size());
  }

  void shutdown() {
    std::lock_guard guard(close_mu);
    if (closed.exchange(true)) return;
    for (auto& ep : eps) {
      ep->box.close();
      const char b = 1;
      [[maybe_unused]] auto w = ::write(ep->wake[1], &b, 1);
    }
    for (auto& ep : eps) {
      if (ep->reader.joinable()) ep->reader.join();
    }
    {
      std::lock_guard lock(conn_mu);
      for (auto& [key, fd] : conns) ::close(fd);
      conns.clear();
    }
    for (auto& ep : eps) {
      ::close(ep->listener);
      ::close(ep->wake[0]);
      ::close(ep->wake[1]);
    }
  }
};

SocketTransport::SocketTransport(std::size_t endpoints) : impl_(std::make_unique<Impl>(endpoints)) {}
SocketTransport::~SocketTransport() = default;
std::size_t SocketTransport::endpoints() const { return impl_->eps.size(); }
void SocketTransport::send(const Envelope& env) { impl_->send(env); }
Envelope SocketTransport::receive(ProcessId self) { return impl_->eps.at(self)->box.pop(); }
void SocketTransport::close() { impl_->shutdown(); }

TransportKind parse_transport_kind(std::string_view name) {
  if (name == "channel") return TransportKind::kChannel;
  if (name == "socket") return TransportKind::kSocket;
  throw ConfigError("unknown transport '" + std::string(name) + "' (expected channel or socket)");
}

std::unique_ptr<Transport> make_transport(TransportKind kind, std::size_t endpoints) {
  if (kind == TransportKind::kSocket) return std::make_unique<SocketTransport>(endpoints);
  return std::make_unique<ChannelTransport>(endpoints);
}

}  // namespace multihit::sched
