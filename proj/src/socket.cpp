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

#include "ephemstore/socket.hpp"

#include <sys/socket.h>
#include <sys/uio.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "ephemstore/error.hpp"
#include "ephemstore/stripe.hpp"

namespace ephemstore::net {

Fd& Fd::operator=(Fd&& other) noexcept {
  if (this != &other) reset(other.release());
  return *this;
}

int Fd::release() {
  int fd = fd_;
  fd_ = -1;
  return fd;
}

void Fd::reset(int fd) {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

std::string Endpoint::socket_name() const {
  return "ephemstore/" + realm + "/" + address + ":" + std::to_string(port);
}

std::string realm_for(const std::filesystem::path& working_root) {
  std::error_code ec;
  auto canonical = std::filesystem::weakly_canonical(working_root, ec);
  if (!ec && !canonical.has_filename() && canonical.has_relative_path()) canonical = canonical.parent_path();
  const std::string key = ec ? working_root.string() : canonical.string();
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << ministore::fnv1a(key);
  return out.str();
}

namespace {

socklen_t make_address(const Endpoint& ep, sockaddr_un& addr) {
  std::memset(&addr, 0, sizeof addr);
  addr.sun_family = AF_UNIX;
  const std::string name = ep.socket_name();
  if (name.size() + 1 > sizeof addr.sun_path) throw Error("endpoint name too long: " + name);
  // Leading NUL selects the abstract namespace.
  std::memcpy(addr.sun_path + 1, name.data(), name.size());
  return static_cast<socklen_t>(offsetof(sockaddr_un, sun_path) + 1 + name.size());
}

[[noreturn]] void throw_errno(const std::string& what) {
  throw ProtocolError(what + ": " + std::strerror(errno));
}

void read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r > 0) {
      got += static_cast<std::size_t>(r);
    } else if (r == 0) {
      throw ProtocolError("connection closed mid-frame");
    } else if (errno == EINTR) {
      continue;
    } else if (errno == EAGAIN || errno == EWOULDBLOCK) {
      throw ProtocolError("timed out waiting for reply");
    } else {
      throw_errno("recv");
    }
  }
}

}  // namespace

Fd listen_on(const Endpoint& ep) {
  Fd fd(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd) throw_errno("socket");
  sockaddr_un addr;
  socklen_t len = make_address(ep, addr);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), len) != 0) {
    if (errno == EADDRINUSE) throw PortCollision("endpoint " + ep.to_string() + " already in use");
    throw_errno("bind " + ep.to_string());
  }
  if (::listen(fd.get(), 128) != 0) throw_errno("listen");
  return fd;
}

std::optional<Fd> try_connect(const Endpoint& ep) {
  Fd fd(::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd) throw_errno("socket");
  sockaddr_un addr;
  socklen_t len = make_address(ep, addr);
  while (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), len) != 0) {
    if (errno == EINTR) continue;
    return std::nullopt;
  }
  return fd;
}

bool is_live(const Endpoint& ep) { return try_connect(ep).has_value(); }

void set_timeout(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void send_frame(int fd, std::uint8_t opcode, std::span<const std::uint8_t> payload) {
  auto header = wire::encode_header(opcode, static_cast<std::uint32_t>(payload.size()));
  iovec iov[2];
  iov[0].iov_base = header.data();
  iov[0].iov_len = header.size();
  iov[1].iov_base = const_cast<std::uint8_t*>(payload.data());
  iov[1].iov_len = payload.size();
  std::size_t total = header.size() + payload.size();
  std::size_t sent = 0;
  int idx = 0;
  while (sent < total) {
    msghdr msg{};
    msg.msg_iov = iov + idx;
    msg.msg_iovlen = static_cast<std::size_t>(2 - idx);
    ssize_t n = ::sendmsg(fd, &msg, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw ProtocolError("timed out sending frame");
      throw_errno("send");
    }
    sent += static_cast<std::size_t>(n);
    auto advance = static_cast<std::size_t>(n);
    while (advance > 0 && idx < 2) {
      if (advance >= iov[idx].iov_len) {
        advance -= iov[idx].iov_len;
        iov[idx].iov_len = 0;
        ++idx;
      } else {
        iov[idx].iov_base = static_cast<std::uint8_t*>(iov[idx].iov_base) + advance;
        iov[idx].iov_len -= advance;
        advance = 0;
      }
    }
    while (idx < 2 && iov[idx].iov_len == 0) ++idx;
  }
}

std::optional<wire::Frame> recv_frame(int fd) {
  std::array<std::uint8_t, wire::kHeaderSize> header{};
  ssize_t first;
  do {
    first = ::recv(fd, header.data(), 1, 0);
  } while (first < 0 && errno == EINTR);
  if (first == 0) return std::nullopt;
  if (first < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK) throw ProtocolError("timed out waiting for reply");
    if (errno == ECONNRESET) return std::nullopt;
    throw_errno("recv");
  }
  read_exact(fd, header.data() + 1, header.size() - 1);
  wire::Frame frame;
  std::uint32_t len = wire::decode_header(header, frame.opcode);
  frame.payload.resize(len);
  if (len) read_exact(fd, frame.payload.data(), len);
  return frame;
}

Connection::Connection(const Endpoint& ep, std::optional<std::chrono::milliseconds> timeout)
    : endpoint_(ep) {
  auto fd = try_connect(ep);
  if (!fd) throw ProtocolError("cannot connect to " + ep.to_string());
  fd_ = std::move(*fd);
  if (timeout) set_timeout(fd_.get(), *timeout);
}

Reply Connection::call(wire::Opcode op, std::span<const std::uint8_t> payload) {
  if (!fd_) throw ProtocolError("not connected to " + endpoint_.to_string());
  const auto code = static_cast<std::uint8_t>(op);
  try {
    send_frame(fd_.get(), code, payload);
    auto frame = recv_frame(fd_.get());
    if (!frame) throw ProtocolError("connection to " + endpoint_.to_string() + " closed");
    if (frame->opcode != (code | wire::kReplyBit)) {
      throw ProtocolError("reply opcode mismatch from " + endpoint_.to_string());
    }
    wire::Decoder dec(frame->payload);
    Reply reply;
    reply.status = static_cast<wire::Status>(dec.u8());
    if (!reply.ok()) {
      reply.message = dec.str();
      return reply;
    }
    reply.body.assign(frame->payload.begin() + 1, frame->payload.end());
    return reply;
  } catch (const ProtocolError&) {
    fd_.reset();
    throw;
  }
}

std::vector<std::uint8_t> ok_reply(std::span<const std::uint8_t> body) {
  std::vector<std::uint8_t> out;
  out.reserve(body.size() + 1);
  out.push_back(static_cast<std::uint8_t>(wire::Status::ok));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::vector<std::uint8_t> error_reply(wire::Status status, std::string_view message) {
  wire::Encoder enc;
  enc.u8(static_cast<std::uint8_t>(status)).str(message);
  return enc.take();
}

}  // namespace ephemstore::net
