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

#include "ephemstore/stripe.hpp"

#include <algorithm>
#include <set>

#include "ephemstore/error.hpp"

namespace ephemstore::ministore {

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void StripeMap::validate() const {
  if (stripe_size_bytes == 0) throw Error("stripe size must be > 0");
  if (targets.empty()) throw Error("stripe map has no targets");
  if (start_target_index >= targets.size()) throw Error("start target index out of range");
  std::set<std::string> seen(targets.begin(), targets.end());
  if (seen.size() != targets.size()) throw Error("stripe map lists a target twice");
}

std::uint32_t start_index_for(std::string_view path, std::size_t target_count) {
  if (target_count == 0) throw Error("no storage targets");
  return static_cast<std::uint32_t>(fnv1a(path) % target_count);
}

StripeMap make_stripe_map(std::string_view path, std::uint64_t file_id, std::uint64_t stripe_size,
                          std::vector<std::string> targets, std::uint32_t stripe_count) {
  if (targets.empty()) throw Error("no storage targets registered");
  std::sort(targets.begin(), targets.end());
  StripeMap map;
  map.file_id = file_id;
  map.stripe_size_bytes = stripe_size;
  if (stripe_count != 0 && stripe_count < targets.size()) {
    // A window of stripe_count consecutive targets, rotated by the path hash.
    std::size_t first = fnv1a(std::string(path) + "#window") % targets.size();
    for (std::uint32_t i = 0; i < stripe_count; ++i) {
      map.targets.push_back(targets[(first + i) % targets.size()]);
    }
  } else {
    map.targets = std::move(targets);
  }
  map.start_target_index = start_index_for(path, map.targets.size());
  map.validate();
  return map;
}

std::vector<ChunkPiece> split_range(std::uint64_t offset, std::uint64_t length,
                                    std::uint64_t stripe_size) {
  std::vector<ChunkPiece> pieces;
  std::uint64_t done = 0;
  while (done < length) {
    const std::uint64_t pos = offset + done;
    const std::uint64_t in_chunk = pos % stripe_size;
    const std::uint64_t n = std::min(stripe_size - in_chunk, length - done);
    pieces.push_back(ChunkPiece{pos / stripe_size, in_chunk, n, done});
    done += n;
  }
  return pieces;
}

std::string chunk_file_name(std::uint64_t file_id, std::uint64_t chunk) {
  return std::to_string(file_id) + "." + std::to_string(chunk);
}

std::string normalize_path(std::string_view path) {
  if (path.empty() || path.front() != '/') {
    throw Error("namespace path must be absolute: '" + std::string(path) + "'");
  }
  std::string out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) {
      auto part = path.substr(i, j - i);
      if (part == "." || part == "..") throw Error("'.' and '..' are not allowed: " + std::string(path));
      out += '/';
      out += part;
    }
    i = j;
  }
  return out.empty() ? "/" : out;
}

std::string parent_of(std::string_view p) {
  if (p == "/") return "/";
  auto pos = p.rfind('/');
  return pos == 0 ? "/" : std::string(p.substr(0, pos));
}

std::string name_of(std::string_view p) {
  auto pos = p.rfind('/');
  return std::string(p.substr(pos + 1));
}

void encode(wire::Encoder& enc, const StripeMap& map) {
  enc.u64(map.file_id).u64(map.stripe_size_bytes).u32(map.start_target_index);
  enc.u32(static_cast<std::uint32_t>(map.targets.size()));
  for (const auto& t : map.targets) enc.str(t);
}

StripeMap decode_stripe(wire::Decoder& dec) {
  StripeMap map;
  map.file_id = dec.u64();
  map.stripe_size_bytes = dec.u64();
  map.start_target_index = dec.u32();
  std::uint32_t n = dec.u32();
  if (n > dec.remaining()) throw ProtocolError("bad target count");
  for (std::uint32_t i = 0; i < n; ++i) map.targets.push_back(dec.str());
  return map;
}

void encode(wire::Encoder& enc, const FileMeta& meta) {
  enc.str(meta.path).u64(meta.file_id).u64(meta.size_bytes).u8(meta.is_directory ? 1 : 0);
  encode(enc, meta.stripe);
  enc.u32(static_cast<std::uint32_t>(meta.attrs.size()));
  for (const auto& [k, v] : meta.attrs) enc.str(k).str(v);
}

FileMeta decode_meta(wire::Decoder& dec) {
  FileMeta meta;
  meta.path = dec.str();
  meta.file_id = dec.u64();
  meta.size_bytes = dec.u64();
  meta.is_directory = dec.u8() != 0;
  meta.stripe = decode_stripe(dec);
  std::uint32_t n = dec.u32();
  if (n > dec.remaining()) throw ProtocolError("bad attribute count");
  for (std::uint32_t i = 0; i < n; ++i) {
    auto k = dec.str();
    meta.attrs[k] = dec.str();
  }
  return meta;
}

}  // namespace ephemstore::ministore
