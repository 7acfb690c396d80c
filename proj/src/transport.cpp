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

#include "faast/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "faast/error.hpp"

namespace faast {

void LocalTransport::attach(const CacheletId& id, MessageHandler& handler) {
  std::lock_guard lock(mu_);
  peers_[id] = &handler;
}

void LocalTransport::detach(const CacheletId& id) {
  std::lock_guard lock(mu_);
  peers_.erase(id);
}

void LocalTransport::set_reachable(const CacheletId& id, bool reachable) {
  std::lock_guard lock(mu_);
  if (reachable) {
    unreachable_.erase(id);
  } else {
    unreachable_.insert(id);
  }
}

WireMessage LocalTransport::call(const CacheletId& to, const WireMessage& request,
                                 Charge& charge) {
  MessageHandler* peer = nullptr;
  {
    std::lock_guard lock(mu_);
    auto it = peers_.find(to);
    if (it != peers_.end() && !unreachable_.contains(to)) peer = it->second;
  }
  if (peer == nullptr) throw Error(Errc::kOwnerUnreachable, to.value);
  ++messages_;
  charge.add(link_.message_latency);
  if (!request.payload.empty()) charge.add(transfer_time(request.payload.size(), link_.bandwidth_mb_s));
  WireMessage response = peer->serve(request, charge);
  if (!response.payload.empty()) {
    charge.add_transfer(transfer_time(response.payload.size(), link_.bandwidth_mb_s));
  }
  return response;
}

// ---------------------------------------------------------------------------
// TCP

namespace {

bool read_exact(int fd, std::byte* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

bool write_all(int fd, std::span<const std::byte> data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t r = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(r);
  }
  return true;
}

/// Reads one frame; nullopt on orderly close before a prefix arrives.
std::optional<std::vector<std::byte>> read_frame(int fd) {
  std::vector<std::byte> frame(4);
  if (!read_exact(fd, frame.data(), 4)) return std::nullopt;
  auto total = *frame_size(frame);
  frame.resize(total);
  if (!read_exact(fd, frame.data() + 4, total - 4)) {
    throw Error(Errc::kMalformedFrame, "connection closed mid-frame");
  }
  return frame;
}

}  // namespace

TcpServer::TcpServer(MessageHandler& handler, std::uint16_t port) : handler_(handler) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(Errc::kIo, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listen_fd_, 64) < 0) {
    int err = errno;
    ::close(listen_fd_);
    throw Error(Errc::kIo, std::string("bind/listen: ") + std::strerror(err));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void TcpServer::accept_loop() {
  while (!stopping_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    std::lock_guard lock(workers_mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    open_fds_.insert(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpServer::serve_connection(int fd) {
  try {
    while (!stopping_) {
      auto frame = read_frame(fd);
      if (!frame) break;
      Charge ignored;
      WireMessage response = handler_.serve(decode(*frame), ignored);
      if (!write_all(fd, encode(response))) break;
    }
  } catch (const Error&) {
    // Malformed input: drop the connection.
  }
  std::lock_guard lock(workers_mu_);
  open_fds_.erase(fd);
  ::close(fd);
}

void TcpTransport::add_peer(const CacheletId& id, std::string host, std::uint16_t port) {
  std::lock_guard lock(mu_);
  peers_[id] = {std::move(host), port};
}

WireMessage TcpTransport::call(const CacheletId& to, const WireMessage& request, Charge& charge) {
  std::pair<std::string, std::uint16_t> peer;
  {
    std::lock_guard lock(mu_);
    auto it = peers_.find(to);
    if (it == peers_.end()) throw Error(Errc::kOwnerUnreachable, "no address for " + to.value);
    peer = it->second;
  }
  auto start = std::chrono::steady_clock::now();
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(Errc::kOwnerUnreachable, std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(peer.second);
  if (::inet_pton(AF_INET, peer.first.c_str(), &addr.sin_addr) != 1 ||
      ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd);
    throw Error(Errc::kOwnerUnreachable, "cannot connect to " + to.value);
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));

  std::optional<std::vector<std::byte>> frame;
  bool sent = write_all(fd, encode(request));
  try {
    if (sent) frame = read_frame(fd);
  } catch (...) {
    ::close(fd);
    throw Error(Errc::kOwnerUnreachable, "connection to " + to.value + " broke mid-response");
  }
  ::close(fd);
  if (!frame) throw Error(Errc::kOwnerUnreachable, "no response from " + to.value);
  charge.add(std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start));
  return decode(*frame);
}

}  // namespace faast
