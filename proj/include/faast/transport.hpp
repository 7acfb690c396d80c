// Copyright 2026 The Faast Authors
//
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

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "faast/types.hpp"
#include "faast/wire.hpp"

namespace faast {

/// Anything that answers inter-cachelet requests.
class MessageHandler {
 public:
  virtual ~MessageHandler() = default;
  virtual WireMessage serve(const WireMessage& request, Charge& charge) = 0;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Sends `request` to `to` and waits for its response. Throws
  /// kOwnerUnreachable when the peer cannot be contacted.
  virtual WireMessage call(const CacheletId& to, const WireMessage& request, Charge& charge) = 0;
};

/// Cost of one request/response exchange between two instances.
struct LinkModel {
  Millis message_latency{8};
  double bandwidth_mb_s = 500;  // BW_Inst
};

/// In-process transport. Messages are handed to the peer's handler
/// directly and payload blobs travel as shared handles, so no bytes are
/// copied; the link model is still charged.
class LocalTransport final : public Transport {
 public:
  explicit LocalTransport(LinkModel link = {}) : link_(link) {}

  void attach(const CacheletId& id, MessageHandler& handler);
  void detach(const CacheletId& id);
  /// Fault injection.
  void set_reachable(const CacheletId& id, bool reachable);

  const LinkModel& link() const noexcept { return link_; }
  std::uint64_t messages() const noexcept { return messages_; }

  WireMessage call(const CacheletId& to, const WireMessage& request, Charge& charge) override;

 private:
  LinkModel link_;
  mutable std::mutex mu_;
  std::map<CacheletId, MessageHandler*> peers_;
  std::set<CacheletId> unreachable_;
  std::atomic<std::uint64_t> messages_{0};
};

/// Serves framed requests over TCP on 127.0.0.1, one frame per request
/// and one per response. Each connection is handled on its own thread.
class TcpServer {
 public:
  /// Binds an ephemeral port when `port` is 0.
  TcpServer(MessageHandler& handler, std::uint16_t port = 0);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  MessageHandler& handler_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex workers_mu_;
  std::vector<std::thread> workers_;
  std::set<int> open_fds_;
};

/// Client side of TcpServer. Opens one connection per call and charges
/// the measured wall time.
class TcpTransport final : public Transport {
 public:
  void add_peer(const CacheletId& id, std::string host, std::uint16_t port);

  WireMessage call(const CacheletId& to, const WireMessage& request, Charge& charge) override;

 private:
  std::mutex mu_;
  std::map<CacheletId, std::pair<std::string, std::uint16_t>> peers_;
};

}  // namespace faast
