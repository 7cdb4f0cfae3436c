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
#include <string>
#include <utility>
#include <vector>

#include "ephemstore/inventory.hpp"
#include "ephemstore/units.hpp"

namespace ephemstore::planner {

using inventory::Allocation;
using inventory::DiskSpec;
using inventory::NodeSpec;

inline constexpr std::uint64_t kDefaultStripeSize = kMiB;
// Each service kind owns a band of ten ports above base_port.
inline constexpr std::uint32_t kPortBand = 10;

struct DeploymentPolicy {
  std::uint32_t meta_disks_per_node = 1;
  std::uint32_t storage_disks_per_node = 2;
  bool colocate_mgmt_on_first_meta = true;
  std::uint32_t dedicated_mgmt_disks = 0;
  std::uint64_t stripe_size_bytes = kDefaultStripeSize;
  std::uint32_t stripe_count = 0;  // 0: stripe over every storage target
  std::uint32_t base_port = 8000;
  bool enable_xattr_metadata = false;

  // Throws UsageError when an invariant is broken.
  void validate() const;

  // Two disks for storage and one for metadata per node; management and
  // monitoring share the first node's metadata disk.
  static DeploymentPolicy dom();
  // One dedicated management/monitoring disk, two metadata, five storage.
  static DeploymentPolicy ault();

  bool operator==(const DeploymentPolicy&) const = default;
};

enum class Role { management, monitoring, metadata, storage };
enum class ServiceKind { management, metadata, storage, monitoring, client };

std::string_view to_string(Role role);
std::string_view to_string(ServiceKind kind);
ServiceKind service_kind_from_string(std::string_view text);

struct RoleAssignment {
  std::string node;
  std::string disk;
  std::filesystem::path mount_root;
  Role role = Role::storage;

  bool operator==(const RoleAssignment&) const = default;
};

struct ServiceConfig {
  std::string id;  // unique across the plan, e.g. "storage@dw01:nvme1n1"
  ServiceKind service = ServiceKind::storage;
  std::string node;     // empty for the client template
  std::string address;  // host the service listens on
  std::string disk;     // empty for the client template
  std::uint32_t listen_port = 0;
  std::string mgmt_address;
  std::uint32_t mgmt_port = 0;
  std::filesystem::path data_dir;
  std::vector<std::pair<std::string, std::string>> options;  // ordered

  std::string option(std::string_view key, std::string fallback = {}) const;
  bool operator==(const ServiceConfig&) const = default;
};

struct DeploymentPlan {
  Allocation allocation;
  DeploymentPolicy policy;
  std::vector<RoleAssignment> assignments;
  std::vector<ServiceConfig> services;     // in startup order
  std::vector<std::string> startup_order;  // service ids

  const ServiceConfig& management() const;
  const ServiceConfig& client_template() const;
  const ServiceConfig& service(const std::string& id) const;
  std::vector<const ServiceConfig*> of_kind(ServiceKind kind) const;
  std::size_t count(Role role) const;

  // Startup tiers: management, metadata, storage, monitoring, client.
  std::vector<std::vector<const ServiceConfig*>> tiers() const;

  bool operator==(const DeploymentPlan&) const = default;
};

// Throws InsufficientDisks (naming the node) or PlanningError.
DeploymentPlan plan_deployment(const Allocation& alloc, const DeploymentPolicy& policy);

struct RenderedDocument {
  std::filesystem::path path;  // relative file name
  std::string content;
  bool operator==(const RenderedDocument&) const = default;
};

std::string render_config(const ServiceConfig& config);
std::vector<RenderedDocument> render_configs(const DeploymentPlan& plan);

// Inverse of render_config; used by daemons and clients. Throws ParseError.
ServiceConfig parse_config(std::string_view document);

// Human-readable role table and plan dump.
std::string format_role_table(const DeploymentPlan& plan);
std::string format_plan(const DeploymentPlan& plan);

}  // namespace ephemstore::planner
