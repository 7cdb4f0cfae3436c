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

#include "ephemstore/wire.hpp"

#include <algorithm>

#include "ephemstore/error.hpp"

namespace ephemstore::wire {

std::string_view to_string(Opcode op) {
  switch (op) {
    case Opcode::ping: return "ping";
    case Opcode::shutdown: return "shutdown";
    case Opcode::register_service: return "register_service";
    case Opcode::snapshot: return "snapshot";
    case Opcode::create: return "create";
    case Opcode::mkdir: return "mkdir";
    case Opcode::rmdir: return "rmdir";
    case Opcode::unlink: return "unlink";
    case Opcode::stat: return "stat";
    case Opcode::extend_size: return "extend_size";
    case Opcode::readdir: return "readdir";
    case Opcode::dir_mark: return "dir_mark";
    case Opcode::dir_unmark: return "dir_unmark";
    case Opcode::write_chunk: return "write_chunk";
    case Opcode::read_chunk: return "read_chunk";
    case Opcode::extend_chunk: return "extend_chunk";
    case Opcode::drop_file: return "drop_file";
    case Opcode::target_info: return "target_info";
    case Opcode::sync_file: return "sync_file";
    case Opcode::monitor_stats: return "monitor_stats";
  }
  return "unknown";
}

bool is_known(std::uint8_t op) { return to_string(static_cast<Opcode>(op)) != "unknown"; }

std::string_view to_string(Status status) {
  switch (status) {
    case Status::ok: return "ok";
    case Status::not_found: return "not found";
    case Status::exists: return "exists";
    case Status::not_empty: return "directory not empty";
    case Status::not_directory: return "not a directory";
    case Status::is_directory: return "is a directory";
    case Status::no_space: return "no space left on target";
    case Status::io_error: return "I/O error";
    case Status::bad_request: return "bad request";
    case Status::duplicate: return "duplicate";
    case Status::unavailable: return "unavailable";
  }
  return "unknown status";
}

std::array<std::uint8_t, kHeaderSize> encode_header(std::uint8_t opcode, std::uint32_t length) {
  std::array<std::uint8_t, kHeaderSize> h{};
  std::copy(kMagic.begin(), kMagic.end(), h.begin());
  h[4] = opcode;
  h[5] = static_cast<std::uint8_t>(length >> 24);
  h[6] = static_cast<std::uint8_t>(length >> 16);
  h[7] = static_cast<std::uint8_t>(length >> 8);
  h[8] = static_cast<std::uint8_t>(length);
  return h;
}

std::uint32_t decode_header(std::span<const std::uint8_t, kHeaderSize> h, std::uint8_t& opcode) {
  if (!std::equal(kMagic.begin(), kMagic.begin() + 3, h.begin())) {
    throw ProtocolError("bad frame magic");
  }
  if (h[3] != kProtocolVersion) {
    throw ProtocolError("unsupported protocol version " + std::to_string(h[3]));
  }
  opcode = h[4];
  std::uint32_t len = (std::uint32_t{h[5]} << 24) | (std::uint32_t{h[6]} << 16) |
                      (std::uint32_t{h[7]} << 8) | std::uint32_t{h[8]};
  if (len > kMaxPayload) throw ProtocolError("frame payload too large: " + std::to_string(len));
  return len;
}

Encoder& Encoder::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

Encoder& Encoder::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  buf_.push_back(static_cast<std::uint8_t>(v));
  return *this;
}

Encoder& Encoder::u32(std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  return *this;
}

Encoder& Encoder::u64(std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  return *this;
}

Encoder& Encoder::str(std::string_view v) {
  u32(static_cast<std::uint32_t>(v.size()));
  buf_.insert(buf_.end(), v.begin(), v.end());
  return *this;
}

Encoder& Encoder::bytes(std::span<const std::uint8_t> v) {
  u32(static_cast<std::uint32_t>(v.size()));
  buf_.insert(buf_.end(), v.begin(), v.end());
  return *this;
}

std::span<const std::uint8_t> Decoder::take(std::size_t n) {
  if (n > remaining()) throw ProtocolError("truncated payload");
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t Decoder::u8() { return take(1)[0]; }

std::uint16_t Decoder::u16() {
  auto b = take(2);
  return static_cast<std::uint16_t>((b[0] << 8) | b[1]);
}

std::uint32_t Decoder::u32() {
  auto b = take(4);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::uint64_t Decoder::u64() {
  auto b = take(8);
  std::uint64_t v = 0;
  for (auto byte : b) v = (v << 8) | byte;
  return v;
}

std::string Decoder::str() {
  auto b = take(u32());
  return std::string(b.begin(), b.end());
}

std::span<const std::uint8_t> Decoder::bytes() { return take(u32()); }

}  // namespace ephemstore::wire
