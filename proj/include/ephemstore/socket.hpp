/** Copyright 2026 The Ephemstore Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ephemstore/wire.hpp"

namespace ephemstore::net {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(other.release()) {}
  Fd& operator=(Fd&& other) noexcept;
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  int release();
  void reset(int fd = -1);

 private:
  int fd_ = -1;
};

// A service address. Services of one deployment share a realm derived from
// the deployment's working root, so independent deployments on the same
// host never see each other. (address, port) maps onto a Linux abstract
// unix socket, which disappears with its owning process.
struct Endpoint {
  std::string realm;
  std::string address;
  std::uint32_t port = 0;

  std::string socket_name() const;
  std::string to_string() const { return address + ":" + std::to_string(port); }
  bool operator==(const Endpoint&) const = default;
};

std::string realm_for(const std::filesystem::path& working_root);

// Throws PortCollision when the endpoint is already bound.
Fd listen_on(const Endpoint& ep);
std::optional<Fd> try_connect(const Endpoint& ep);
bool is_live(const Endpoint& ep);

void set_timeout(int fd, std::chrono::milliseconds timeout);

// Throws ProtocolError on I/O failure or timeout.
void send_frame(int fd, std::uint8_t opcode, std::span<const std::uint8_t> payload);
// nullopt on orderly EOF before a header byte arrives.
std::optional<wire::Frame> recv_frame(int fd);

struct Reply {
  wire::Status status = wire::Status::ok;
  std::string message;
  std::vector<std::uint8_t> body;
  bool ok() const { return status == wire::Status::ok; }
};

// One blocking request/response channel to a service.
class Connection {
 public:
  Connection() = default;
  // Throws ProtocolError when nothing listens at the endpoint.
  explicit Connection(const Endpoint& ep,
                      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  Reply call(wire::Opcode op, std::span<const std::uint8_t> payload = {});
  const Endpoint& endpoint() const { return endpoint_; }
  bool connected() const { return static_cast<bool>(fd_); }

 private:
  Endpoint endpoint_;
  Fd fd_;
};

// Server-side reply helpers.
std::vector<std::uint8_t> ok_reply(std::span<const std::uint8_t> body = {});
std::vector<std::uint8_t> error_reply(wire::Status status, std::string_view message);

}  // namespace ephemstore::net
