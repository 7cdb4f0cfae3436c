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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ephemstore::wire {

// Frame layout (all integers big-endian):
//   magic[4] = 'E' 'P' 'S' <version>
//   opcode   u8
//   length   u32   payload byte count
//   payload  length bytes
// A reply echoes the request opcode with the high bit set; its payload starts
// with a Status byte. Non-ok replies carry a message string after the status.
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::array<std::uint8_t, 4> kMagic = {'E', 'P', 'S', kProtocolVersion};
inline constexpr std::size_t kHeaderSize = 9;
inline constexpr std::uint32_t kMaxPayload = 128u << 20;
inline constexpr std::uint8_t kReplyBit = 0x80;

enum class Opcode : std::uint8_t {
  ping = 0x01,
  shutdown = 0x02,

  register_service = 0x10,
  snapshot = 0x11,

  create = 0x20,
  mkdir = 0x21,
  rmdir = 0x22,
  unlink = 0x23,
  stat = 0x24,
  extend_size = 0x25,
  readdir = 0x26,
  dir_mark = 0x27,
  dir_unmark = 0x28,

  write_chunk = 0x30,
  read_chunk = 0x31,
  extend_chunk = 0x32,
  drop_file = 0x33,
  target_info = 0x34,
  sync_file = 0x35,

  monitor_stats = 0x40,
};

std::string_view to_string(Opcode op);
bool is_known(std::uint8_t op);

enum class Status : std::uint8_t {
  ok = 0,
  not_found = 1,
  exists = 2,
  not_empty = 3,
  not_directory = 4,
  is_directory = 5,
  no_space = 6,
  io_error = 7,
  bad_request = 8,
  duplicate = 9,
  unavailable = 10,
};

std::string_view to_string(Status status);

struct Frame {
  std::uint8_t opcode = 0;
  std::vector<std::uint8_t> payload;
};

std::array<std::uint8_t, kHeaderSize> encode_header(std::uint8_t opcode, std::uint32_t length);

// Validates magic and length. Throws ProtocolError.
std::uint32_t decode_header(std::span<const std::uint8_t, kHeaderSize> header, std::uint8_t& opcode);

class Encoder {
 public:
  Encoder& u8(std::uint8_t v);
  Encoder& u16(std::uint16_t v);
  Encoder& u32(std::uint32_t v);
  Encoder& u64(std::uint64_t v);
  Encoder& str(std::string_view v);
  Encoder& bytes(std::span<const std::uint8_t> v);

  std::vector<std::uint8_t>& buffer() { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

// Reads fields in order; throws ProtocolError on truncation.
class Decoder {
 public:
  explicit Decoder(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::string str();
  std::span<const std::uint8_t> bytes();

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace ephemstore::wire
