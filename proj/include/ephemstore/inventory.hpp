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
#include <filesystem>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ephemstore/constraint.hpp"

namespace ephemstore::inventory {

// Feature that lets a compute node carry allocatable disks (node-local
// storage, e.g. NVMe inside a compute node).
inline constexpr std::string_view kLocalStorageFeature = "local-storage";
inline constexpr std::string_view kStorageFeature = "storage";

struct DiskSpec {
  std::string id;
  std::filesystem::path mount_root;
  std::uint64_t capacity_bytes = 0;
  std::uint64_t nominal_read_bw = 0;   // bytes/s
  std::uint64_t nominal_write_bw = 0;  // bytes/s

  bool operator==(const DiskSpec&) const = default;
};

enum class NodeKind { compute, storage };

struct NodeSpec {
  std::string id;
  std::string address;
  NodeKind kind = NodeKind::compute;
  std::set<std::string> features;
  std::uint32_t cpus = 0;
  std::uint64_t dram_bytes = 0;
  std::vector<DiskSpec> disks;

  bool has_feature(std::string_view f) const { return features.count(std::string(f)) != 0; }
  bool operator==(const NodeSpec&) const = default;
};

std::string_view to_string(NodeKind kind);

// Parses the sectioned inventory format (docs/inventory-format.md).
// Throws ParseError carrying the offending line number.
std::vector<NodeSpec> load_inventory(std::string_view document);
std::vector<NodeSpec> load_inventory_file(const std::filesystem::path& path);

enum class Purpose { compute, storage };
enum class AllocationState { granted, active, released };

std::string_view to_string(Purpose purpose);
std::string_view to_string(AllocationState state);

struct AllocationRequest {
  std::size_t count = 1;
  std::string constraint;
  Purpose purpose = Purpose::storage;
};

struct Allocation {
  std::string id;
  Purpose purpose = Purpose::storage;
  std::string constraint;
  std::vector<NodeSpec> nodes;
  AllocationState state = AllocationState::granted;

  std::vector<std::string> node_ids() const;
  bool operator==(const Allocation&) const = default;
};

// True when `node` may serve `purpose` at all, before any constraint.
// Storage needs a storage node or a compute node advertising local storage.
bool eligible_for(const NodeSpec& node, Purpose purpose);

// Grants and releases allocations over a fixed inventory. Mutations are
// serialized; queries may run concurrently.
class AllocationRegistry {
 public:
  explicit AllocationRegistry(std::vector<NodeSpec> inventory);

  // Picks `count` free nodes that satisfy the constraint, lowest id first.
  // Throws InsufficientNodes or UsageError (bad or unknown feature).
  Allocation request(const AllocationRequest& req);

  // Marks a granted allocation active (a deployment is using it).
  Allocation activate(const Allocation& alloc);

  // Throws StateError on double release or an unknown allocation.
  Allocation release(const Allocation& alloc);

  std::vector<Allocation> allocations() const;
  const std::vector<NodeSpec>& inventory() const { return inventory_; }
  const std::set<std::string>& declared_features() const { return features_; }

 private:
  std::vector<NodeSpec> inventory_;
  std::set<std::string> features_;
  std::map<std::string, Allocation> allocations_;
  std::uint64_t next_id_ = 1;
  mutable std::shared_mutex mutex_;
};

}  // namespace ephemstore::inventory
