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
#include <string>
#include <vector>

#include "ephemstore/planner.hpp"
#include "ephemstore/socket.hpp"
#include "ephemstore/wire.hpp"

namespace ephemstore::ministore {

using planner::ServiceKind;

struct RegistryEntry {
  ServiceKind kind = ServiceKind::storage;
  std::string id;  // storage: target id; others: service id
  std::string address;
  std::uint32_t port = 0;
  std::uint32_t shard = 0;   // metadata only
  std::uint32_t shards = 0;  // metadata only

  bool operator==(const RegistryEntry&) const = default;
};

struct RegistrySnapshot {
  std::uint64_t namespace_id = 0;
  std::uint32_t expected_metadata = 0;
  std::uint32_t expected_storage = 0;
  std::vector<RegistryEntry> entries;  // registration order

  std::size_t count(ServiceKind kind) const;
  // Metadata sorted by shard, storage sorted by target id.
  std::vector<RegistryEntry> of_kind(ServiceKind kind) const;
  bool complete() const;
};

void encode(wire::Encoder& enc, const RegistryEntry& entry);
RegistryEntry decode_entry(wire::Decoder& dec);
void encode(wire::Encoder& enc, const RegistrySnapshot& snap);
RegistrySnapshot decode_snapshot(wire::Decoder& dec);

// Client side of the management registry. Throws ManagementUnreachable when
// nothing answers, AlreadyExists on a duplicate id.
RegistrySnapshot register_service(const net::Endpoint& mgmt, const RegistryEntry& entry);
RegistrySnapshot query_registry(const net::Endpoint& mgmt);

}  // namespace ephemstore::ministore
