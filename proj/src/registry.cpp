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

#include "ephemstore/registry.hpp"

#include <algorithm>

#include "ephemstore/error.hpp"

namespace ephemstore::ministore {

std::size_t RegistrySnapshot::count(ServiceKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.kind == kind; }));
}

std::vector<RegistryEntry> RegistrySnapshot::of_kind(ServiceKind kind) const {
  std::vector<RegistryEntry> out;
  for (const auto& e : entries) {
    if (e.kind == kind) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const RegistryEntry& a, const RegistryEntry& b) {
    return a.shard != b.shard ? a.shard < b.shard : a.id < b.id;
  });
  return out;
}

bool RegistrySnapshot::complete() const {
  return count(ServiceKind::metadata) == expected_metadata &&
         count(ServiceKind::storage) == expected_storage;
}

void encode(wire::Encoder& enc, const RegistryEntry& e) {
  enc.u8(static_cast<std::uint8_t>(e.kind)).str(e.id).str(e.address).u32(e.port).u32(e.shard).u32(e.shards);
}

RegistryEntry decode_entry(wire::Decoder& dec) {
  RegistryEntry e;
  auto kind = dec.u8();
  if (kind > static_cast<std::uint8_t>(ServiceKind::client)) throw ProtocolError("bad service kind");
  e.kind = static_cast<ServiceKind>(kind);
  e.id = dec.str();
  e.address = dec.str();
  e.port = dec.u32();
  e.shard = dec.u32();
  e.shards = dec.u32();
  return e;
}

void encode(wire::Encoder& enc, const RegistrySnapshot& snap) {
  enc.u64(snap.namespace_id).u32(snap.expected_metadata).u32(snap.expected_storage);
  enc.u32(static_cast<std::uint32_t>(snap.entries.size()));
  for (const auto& e : snap.entries) encode(enc, e);
}

RegistrySnapshot decode_snapshot(wire::Decoder& dec) {
  RegistrySnapshot snap;
  snap.namespace_id = dec.u64();
  snap.expected_metadata = dec.u32();
  snap.expected_storage = dec.u32();
  std::uint32_t n = dec.u32();
  if (n > dec.remaining()) throw ProtocolError("bad registry size");
  for (std::uint32_t i = 0; i < n; ++i) snap.entries.push_back(decode_entry(dec));
  return snap;
}

namespace {

net::Reply call_management(const net::Endpoint& mgmt, wire::Opcode op, std::span<const std::uint8_t> payload) {
  try {
    net::Connection conn(mgmt, std::chrono::milliseconds(5000));
    return conn.call(op, payload);
  } catch (const ProtocolError& e) {
    throw ManagementUnreachable("management " + mgmt.to_string() + " unreachable: " + e.what());
  }
}

}  // namespace

RegistrySnapshot register_service(const net::Endpoint& mgmt, const RegistryEntry& entry) {
  wire::Encoder enc;
  encode(enc, entry);
  auto reply = call_management(mgmt, wire::Opcode::register_service, enc.buffer());
  if (reply.status == wire::Status::duplicate) throw AlreadyExists(reply.message);
  if (!reply.ok()) throw Error("registration failed: " + reply.message);
  wire::Decoder dec(reply.body);
  return decode_snapshot(dec);
}

RegistrySnapshot query_registry(const net::Endpoint& mgmt) {
  auto reply = call_management(mgmt, wire::Opcode::snapshot, {});
  if (!reply.ok()) throw Error("registry query failed: " + reply.message);
  wire::Decoder dec(reply.body);
  return decode_snapshot(dec);
}

}  // namespace ephemstore::ministore
