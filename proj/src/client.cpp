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

#include "ephemstore/client.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ephemstore/error.hpp"
#include "ephemstore/services.hpp"
#include "ephemstore/units.hpp"

namespace ephemstore::ministore {

using wire::Decoder;
using wire::Encoder;
using wire::Opcode;
using wire::Status;

namespace {

[[noreturn]] void raise(const net::Reply& reply, const std::string& target = {}) {
  switch (reply.status) {
    case Status::not_found: throw NotFound(reply.message);
    case Status::exists: throw AlreadyExists(reply.message);
    case Status::not_empty: throw NotEmpty(reply.message);
    case Status::not_directory: throw NotADirectory(reply.message);
    case Status::is_directory: throw IsADirectory(reply.message);
    case Status::no_space: throw NamespaceFull(target, reply.message);
    case Status::io_error:
      if (!target.empty()) throw TargetError(target, reply.message);
      throw Error(reply.message);
    default: throw Error(std::string(wire::to_string(reply.status)) + ": " + reply.message);
  }
}

std::vector<std::uint8_t> path_payload(const std::string& path) {
  Encoder enc;
  enc.str(path);
  return enc.take();
}

FileMeta meta_from(const net::Reply& reply) {
  Decoder dec(reply.body);
  return decode_meta(dec);
}

}  // namespace

Client::Client(Options options) : options_(std::move(options)) {
  refresh_registry();
}

Client Client::from_config(const planner::ServiceConfig& conf, const std::string& realm) {
  Options o;
  o.realm = realm;
  o.management = net::Endpoint{realm, conf.mgmt_address, conf.mgmt_port};
  o.stripe_size = parse_uint(conf.option("stripe_size", std::to_string(planner::kDefaultStripeSize)));
  o.stripe_count = static_cast<std::uint32_t>(parse_uint(conf.option("stripe_count", "0")));
  return Client(std::move(o));
}

Client Client::attach(const std::filesystem::path& attach_point) {
  std::ifstream in(attach_point / kClientConfigName);
  if (!in) throw ManagementUnreachable("no client configuration at " + attach_point.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto conf = planner::parse_config(buf.str());
  return from_config(conf, conf.option("realm"));
}

RegistrySnapshot Client::refresh_registry() {
  snapshot_ = query_registry(options_.management);
  metadata_ = snapshot_.of_kind(ServiceKind::metadata);
  targets_.clear();
  for (const auto& t : snapshot_.of_kind(ServiceKind::storage)) targets_[t.id] = t;
  metadata_conns_.clear();
  target_conns_.clear();
  return snapshot_;
}

net::Connection& Client::metadata_for_dir(const std::string& dir) {
  if (metadata_.empty()) throw Error("no metadata service registered");
  const auto shards = static_cast<std::uint32_t>(metadata_.size());
  for (std::uint32_t i = 0; i < shards; ++i) {
    if (metadata_[i].shard != i || metadata_[i].shards != shards) {
      throw Error("metadata registry incomplete: " + std::to_string(shards) + " of " +
                  std::to_string(metadata_[i].shards) + " shards registered");
    }
  }
  if (metadata_conns_.size() != shards) metadata_conns_.resize(shards);
  const auto shard = metadata_shard_of(dir, shards);
  auto& conn = metadata_conns_[shard];
  if (!conn.connected()) {
    const auto& e = metadata_[shard];
    conn = net::Connection(net::Endpoint{options_.realm, e.address, e.port}, options_.timeout);
  }
  return conn;
}

net::Connection& Client::target(const std::string& target_id) {
  auto it = target_conns_.find(target_id);
  if (it != target_conns_.end() && it->second.connected()) return it->second;
  auto e = targets_.find(target_id);
  if (e == targets_.end()) throw TargetError(target_id, "not registered");
  try {
    auto conn = net::Connection(net::Endpoint{options_.realm, e->second.address, e->second.port}, options_.timeout);
    return target_conns_[target_id] = std::move(conn);
  } catch (const ProtocolError& err) {
    throw TargetError(target_id, err.what());
  }
}

net::Reply Client::meta_call(const std::string& dir, Opcode op, std::span<const std::uint8_t> payload) {
  return metadata_for_dir(dir).call(op, payload);
}

net::Reply Client::target_call(const std::string& target_id, Opcode op, std::span<const std::uint8_t> payload) {
  try {
    auto reply = target(target_id).call(op, payload);
    if (!reply.ok()) raise(reply, target_id);
    return reply;
  } catch (const ProtocolError& err) {
    throw TargetError(target_id, err.what());
  }
}

FileMeta Client::create(const std::string& path) {
  return create(path, options_.stripe_size ? options_.stripe_size : planner::kDefaultStripeSize,
                options_.stripe_count);
}

FileMeta Client::create(const std::string& raw, std::uint64_t stripe_size, std::uint32_t stripe_count) {
  const std::string path = normalize_path(raw);
  Encoder enc;
  enc.str(path).u64(stripe_size).u32(stripe_count);
  enc.u32(static_cast<std::uint32_t>(targets_.size()));
  for (const auto& [id, e] : targets_) enc.str(id);
  auto reply = meta_call(parent_of(path), Opcode::create, enc.buffer());
  if (!reply.ok()) raise(reply);
  return meta_from(reply);
}

FileMeta Client::stat(const std::string& raw) {
  const std::string path = normalize_path(raw);
  auto reply = meta_call(parent_of(path), Opcode::stat, path_payload(path));
  if (!reply.ok()) raise(reply);
  return meta_from(reply);
}

bool Client::exists(const std::string& path) {
  try {
    stat(path);
    return true;
  } catch (const NotFound&) {
    return false;
  }
}

void Client::mkdir(const std::string& raw) {
  const std::string path = normalize_path(raw);
  auto payload = path_payload(path);
  auto reply = meta_call(parent_of(path), Opcode::mkdir, payload);
  if (!reply.ok()) raise(reply);
  auto mark = meta_call(path, Opcode::dir_mark, payload);
  if (!mark.ok()) {
    meta_call(parent_of(path), Opcode::rmdir, payload);
    raise(mark);
  }
}

void Client::rmdir(const std::string& raw) {
  const std::string path = normalize_path(raw);
  if (path == "/") throw Error("cannot remove the namespace root");
  auto meta = stat(path);
  if (!meta.is_directory) throw NotADirectory(path + " is not a directory");
  auto payload = path_payload(path);
  auto unmark = meta_call(path, Opcode::dir_unmark, payload);
  if (!unmark.ok()) raise(unmark);
  auto reply = meta_call(parent_of(path), Opcode::rmdir, payload);
  if (!reply.ok()) raise(reply);
}

void Client::unlink(const std::string& raw) {
  const std::string path = normalize_path(raw);
  auto reply = meta_call(parent_of(path), Opcode::unlink, path_payload(path));
  if (!reply.ok()) raise(reply);
  const FileMeta meta = meta_from(reply);
  Encoder enc;
  enc.u64(meta.file_id);
  for (const auto& t : meta.stripe.targets) target_call(t, Opcode::drop_file, enc.buffer());
}

std::vector<DirEntry> Client::readdir(const std::string& raw) {
  const std::string path = normalize_path(raw);
  auto reply = meta_call(path, Opcode::readdir, path_payload(path));
  if (!reply.ok()) {
    if (reply.status == Status::not_found && path != "/" && exists(path)) {
      throw NotADirectory(path + " is not a directory");
    }
    raise(reply);
  }
  Decoder dec(reply.body);
  std::vector<DirEntry> out(dec.u32());
  for (auto& e : out) {
    e.name = dec.str();
    e.is_directory = dec.u8() != 0;
  }
  return out;
}

std::uint64_t Client::write(const std::string& path, std::uint64_t offset, std::span<const std::uint8_t> data) {
  FileMeta meta = stat(path);
  if (meta.is_directory) throw IsADirectory(meta.path + " is a directory");
  return write_at(meta, offset, data);
}

std::vector<std::uint8_t> Client::read(const std::string& path, std::uint64_t offset, std::uint64_t length) {
  FileMeta meta = stat(path);
  if (meta.is_directory) throw IsADirectory(meta.path + " is a directory");
  const std::uint64_t avail = offset >= meta.size_bytes ? 0 : meta.size_bytes - offset;
  std::vector<std::uint8_t> out(std::min(length, avail));
  read_at(meta, offset, out);
  return out;
}

std::uint64_t Client::write_at(FileMeta& meta, std::uint64_t offset, std::span<const std::uint8_t> data) {
  if (data.empty()) return 0;
  const auto& stripe = meta.stripe;
  const std::uint64_t stripe_size = stripe.stripe_size_bytes;
  const std::uint64_t first_chunk = offset / stripe_size;

  // Fill whole chunks between the known end of file and the write so every
  // chunk but the last stays stripe-sized. Extension never shrinks a chunk,
  // so a stale size only costs redundant calls.
  if (offset > meta.size_bytes) {
    for (std::uint64_t c = meta.size_bytes / stripe_size; c < first_chunk; ++c) {
      Encoder enc;
      enc.u64(meta.file_id).u64(c).u64(stripe_size);
      target_call(stripe.target_of(c), Opcode::extend_chunk, enc.buffer());
    }
  }

  for (const auto& piece : split_range(offset, data.size(), stripe_size)) {
    Encoder enc;
    enc.u64(meta.file_id).u64(piece.chunk).u64(piece.offset_in_chunk);
    enc.bytes(data.subspan(piece.buffer_offset, piece.length));
    target_call(stripe.target_of(piece.chunk), Opcode::write_chunk, enc.buffer());
  }

  Encoder enc;
  enc.str(meta.path).u64(offset + data.size());
  auto reply = meta_call(parent_of(meta.path), Opcode::extend_size, enc.buffer());
  if (!reply.ok()) raise(reply);
  Decoder dec(reply.body);
  meta.size_bytes = dec.u64();
  return data.size();
}

std::size_t Client::read_at(const FileMeta& meta, std::uint64_t offset, std::span<std::uint8_t> out) {
  if (offset >= meta.size_bytes) return 0;
  const std::uint64_t n = std::min<std::uint64_t>(out.size(), meta.size_bytes - offset);
  for (const auto& piece : split_range(offset, n, meta.stripe.stripe_size_bytes)) {
    Encoder enc;
    enc.u64(meta.file_id).u64(piece.chunk).u64(piece.offset_in_chunk).u64(piece.length);
    auto reply = target_call(meta.stripe.target_of(piece.chunk), Opcode::read_chunk, enc.buffer());
    Decoder dec(reply.body);
    auto bytes = dec.bytes();
    auto dst = out.subspan(piece.buffer_offset, piece.length);
    std::memcpy(dst.data(), bytes.data(), bytes.size());
    std::fill(dst.begin() + static_cast<std::ptrdiff_t>(bytes.size()), dst.end(), std::uint8_t{0});
  }
  return static_cast<std::size_t>(n);
}

void Client::fsync(const FileMeta& meta) {
  Encoder enc;
  enc.u64(meta.file_id);
  for (const auto& t : meta.stripe.targets) target_call(t, Opcode::sync_file, enc.buffer());
}

TargetInfo Client::target_info(const std::string& target_id) {
  auto reply = target_call(target_id, Opcode::target_info, {});
  Decoder dec(reply.body);
  TargetInfo info;
  info.target_id = dec.str();
  info.used_bytes = dec.u64();
  info.capacity_bytes = dec.u64();
  std::uint32_t n = dec.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    ChunkRecord r;
    r.file_id = dec.u64();
    r.chunk = dec.u64();
    r.length = dec.u64();
    info.chunks.push_back(r);
  }
  return info;
}

}  // namespace ephemstore::ministore
