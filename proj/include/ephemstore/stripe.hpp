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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ephemstore/wire.hpp"

namespace ephemstore::ministore {

std::uint64_t fnv1a(std::string_view data);

// Chunk k of a file lives on targets[(start_target_index + k) % targets.size()].
struct StripeMap {
  std::uint64_t file_id = 0;
  std::uint64_t stripe_size_bytes = 0;
  std::vector<std::string> targets;
  std::uint32_t start_target_index = 0;

  std::size_t target_index_of(std::uint64_t chunk) const {
    return (start_target_index + chunk) % targets.size();
  }
  const std::string& target_of(std::uint64_t chunk) const { return targets[target_index_of(chunk)]; }

  // Throws Error if the map is malformed (empty or duplicate targets, ...).
  void validate() const;
  bool operator==(const StripeMap&) const = default;
};

struct FileMeta {
  std::string path;
  std::uint64_t file_id = 0;
  std::uint64_t size_bytes = 0;
  bool is_directory = false;
  StripeMap stripe;  // empty for directories
  std::map<std::string, std::string> attrs;

  bool operator==(const FileMeta&) const = default;
};

// Deterministic placement of a new file's first chunk.
std::uint32_t start_index_for(std::string_view path, std::size_t target_count);

// Picks the stripe targets for a new file from the registered targets.
// stripe_count 0 (or >= |targets|) uses every target in id order.
StripeMap make_stripe_map(std::string_view path, std::uint64_t file_id, std::uint64_t stripe_size,
                          std::vector<std::string> targets, std::uint32_t stripe_count);

// One stripe-aligned piece of a byte range.
struct ChunkPiece {
  std::uint64_t chunk = 0;
  std::uint64_t offset_in_chunk = 0;
  std::uint64_t length = 0;
  std::uint64_t buffer_offset = 0;  // offset into the caller's buffer

  bool operator==(const ChunkPiece&) const = default;
};

std::vector<ChunkPiece> split_range(std::uint64_t offset, std::uint64_t length,
                                    std::uint64_t stripe_size);

std::string chunk_file_name(std::uint64_t file_id, std::uint64_t chunk);

// Namespace paths are absolute, '/'-separated, without "." or "..".
// normalize_path collapses duplicate and trailing slashes; throws NotFound
// style Error (bad path) otherwise.
std::string normalize_path(std::string_view path);
std::string parent_of(std::string_view normalized);
std::string name_of(std::string_view normalized);

void encode(wire::Encoder& enc, const StripeMap& map);
StripeMap decode_stripe(wire::Decoder& dec);
void encode(wire::Encoder& enc, const FileMeta& meta);
FileMeta decode_meta(wire::Decoder& dec);

}  // namespace ephemstore::ministore

namespace ephemstore::ministore {

// Metadata shard owning the entries of directory `dir` (and its marker).
inline std::uint32_t metadata_shard_of(std::string_view dir, std::uint32_t shards) {
  return shards == 0 ? 0 : static_cast<std::uint32_t>(fnv1a(dir) % shards);
}

}  // namespace ephemstore::ministore
