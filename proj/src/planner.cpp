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

#include "ephemstore/planner.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "ephemstore/error.hpp"

namespace ephemstore::planner {

void DeploymentPolicy::validate() const {
  if (stripe_size_bytes == 0) throw UsageError("stripe size must be > 0");
  if (storage_disks_per_node < 1) throw UsageError("need at least one storage disk per node");
  if (colocate_mgmt_on_first_meta == (dedicated_mgmt_disks >= 1)) {
    throw UsageError("choose exactly one of: management colocated on the first metadata disk, "
                     "or dedicated management disks");
  }
  if (colocate_mgmt_on_first_meta && meta_disks_per_node < 1) {
    throw UsageError("colocating management needs a metadata disk");
  }
  if (dedicated_mgmt_disks > 2) throw UsageError("at most 2 dedicated management disks");
  if (meta_disks_per_node > kPortBand || storage_disks_per_node > kPortBand) {
    throw UsageError("at most " + std::to_string(kPortBand) + " metadata and storage disks per node");
  }
  if (base_port == 0 || base_port + 4 * kPortBand > 65535) throw UsageError("base port out of range");
}

DeploymentPolicy DeploymentPolicy::dom() { return DeploymentPolicy{}; }

DeploymentPolicy DeploymentPolicy::ault() {
  DeploymentPolicy p;
  p.meta_disks_per_node = 2;
  p.storage_disks_per_node = 5;
  p.colocate_mgmt_on_first_meta = false;
  p.dedicated_mgmt_disks = 1;
  return p;
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::management: return "management";
    case Role::monitoring: return "monitoring";
    case Role::metadata: return "metadata";
    case Role::storage: return "storage";
  }
  return "?";
}

std::string_view to_string(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::management: return "management";
    case ServiceKind::metadata: return "metadata";
    case ServiceKind::storage: return "storage";
    case ServiceKind::monitoring: return "monitoring";
    case ServiceKind::client: return "client";
  }
  return "?";
}

ServiceKind service_kind_from_string(std::string_view text) {
  for (auto k : {ServiceKind::management, ServiceKind::metadata, ServiceKind::storage,
                 ServiceKind::monitoring, ServiceKind::client}) {
    if (to_string(k) == text) return k;
  }
  throw UsageError("unknown service kind '" + std::string(text) + "'");
}

std::string ServiceConfig::option(std::string_view key, std::string fallback) const {
  for (const auto& [k, v] : options) {
    if (k == key) return v;
  }
  return fallback;
}

const ServiceConfig& DeploymentPlan::management() const {
  return *of_kind(ServiceKind::management).at(0);
}

const ServiceConfig& DeploymentPlan::client_template() const {
  return *of_kind(ServiceKind::client).at(0);
}

const ServiceConfig& DeploymentPlan::service(const std::string& id) const {
  for (const auto& s : services) {
    if (s.id == id) return s;
  }
  throw Error("no service " + id + " in plan");
}

std::vector<const ServiceConfig*> DeploymentPlan::of_kind(ServiceKind kind) const {
  std::vector<const ServiceConfig*> out;
  for (const auto& s : services) {
    if (s.service == kind) out.push_back(&s);
  }
  return out;
}

std::size_t DeploymentPlan::count(Role role) const {
  return static_cast<std::size_t>(std::count_if(
      assignments.begin(), assignments.end(), [&](const auto& a) { return a.role == role; }));
}

std::vector<std::vector<const ServiceConfig*>> DeploymentPlan::tiers() const {
  std::vector<std::vector<const ServiceConfig*>> out;
  for (auto kind : {ServiceKind::management, ServiceKind::metadata, ServiceKind::storage,
                    ServiceKind::monitoring, ServiceKind::client}) {
    auto tier = of_kind(kind);
    if (!tier.empty()) out.push_back(std::move(tier));
  }
  return out;
}

namespace {

std::string target_id(const NodeSpec& node, const DiskSpec& disk) { return node.id + ":" + disk.id; }

// Digit runs compare by value, so nvme2n1 sorts before nvme10n1.
bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && digit(a[ie])) ++ie;
      while (je < b.size() && digit(b[je])) ++je;
      std::string_view x(a.data() + i, ie - i), y(b.data() + j, je - j);
      while (x.size() > 1 && x.front() == '0') x.remove_prefix(1);
      while (y.size() > 1 && y.front() == '0') y.remove_prefix(1);
      if (x.size() != y.size()) return x.size() < y.size();
      if (x != y) return x < y;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return a.size() - i < b.size() - j;
  return a < b;
}

ServiceConfig make_service(ServiceKind kind, const NodeSpec& node, const DiskSpec* disk,
                           std::uint32_t port) {
  ServiceConfig s;
  s.service = kind;
  s.node = node.id;
  s.address = node.address;
  s.listen_port = port;
  s.id = std::string(to_string(kind)) + "@" + node.id;
  if (disk) {
    s.disk = disk->id;
    s.data_dir = disk->mount_root;
    if (kind == ServiceKind::metadata || kind == ServiceKind::storage) s.id += ":" + disk->id;
  }
  return s;
}

}  // namespace

DeploymentPlan plan_deployment(const Allocation& alloc, const DeploymentPolicy& policy) {
  policy.validate();
  if (alloc.state == inventory::AllocationState::released) {
    throw PlanningError("allocation " + alloc.id + " is released");
  }
  if (alloc.nodes.empty()) throw PlanningError("allocation has zero storage nodes");

  DeploymentPlan plan;
  plan.allocation = alloc;
  plan.policy = policy;

  const std::uint32_t per_node = policy.meta_disks_per_node + policy.storage_disks_per_node;
  for (std::size_t i = 0; i < alloc.nodes.size(); ++i) {
    const auto& node = alloc.nodes[i];
    const std::uint32_t need = per_node + (i == 0 ? policy.dedicated_mgmt_disks : 0);
    if (node.disks.size() < need) throw InsufficientDisks(node.id, node.disks.size(), need);
  }

  std::vector<ServiceConfig> management, metadata, storage, monitoring;
  const std::uint32_t base = policy.base_port;

  for (std::size_t i = 0; i < alloc.nodes.size(); ++i) {
    const NodeSpec& node = alloc.nodes[i];
    std::vector<const DiskSpec*> disks;
    for (const auto& d : node.disks) disks.push_back(&d);
    std::sort(disks.begin(), disks.end(),
              [](const DiskSpec* a, const DiskSpec* b) { return natural_less(a->id, b->id); });

    std::size_t next = 0;
    auto assign = [&](const DiskSpec& d, Role role) {
      plan.assignments.push_back(RoleAssignment{node.id, d.id, d.mount_root, role});
    };

    if (i == 0 && policy.dedicated_mgmt_disks > 0) {
      const DiskSpec& mgmt_disk = *disks[0];
      const DiskSpec& mon_disk = *disks[policy.dedicated_mgmt_disks - 1];
      assign(mgmt_disk, Role::management);
      assign(mon_disk, Role::monitoring);
      management.push_back(make_service(ServiceKind::management, node, &mgmt_disk, base));
      monitoring.push_back(make_service(ServiceKind::monitoring, node, &mon_disk, base + 3 * kPortBand));
      next = policy.dedicated_mgmt_disks;
    }

    for (std::uint32_t k = 0; k < policy.meta_disks_per_node; ++k) {
      const DiskSpec& d = *disks[next++];
      assign(d, Role::metadata);
      metadata.push_back(make_service(ServiceKind::metadata, node, &d, base + kPortBand + k));
      if (i == 0 && k == 0 && policy.colocate_mgmt_on_first_meta) {
        assign(d, Role::management);
        assign(d, Role::monitoring);
        management.push_back(make_service(ServiceKind::management, node, &d, base));
        monitoring.push_back(make_service(ServiceKind::monitoring, node, &d, base + 3 * kPortBand));
      }
    }
    for (std::uint32_t k = 0; k < policy.storage_disks_per_node; ++k) {
      const DiskSpec& d = *disks[next++];
      assign(d, Role::storage);
      auto s = make_service(ServiceKind::storage, node, &d, base + 2 * kPortBand + k);
      s.options.emplace_back("target_id", target_id(node, d));
      s.options.emplace_back("capacity_bytes", std::to_string(d.capacity_bytes));
      storage.push_back(std::move(s));
    }
  }

  if (metadata.empty()) throw PlanningError("plan has no metadata disk");

  const ServiceConfig& mgmt = management.at(0);
  const std::string mgmt_address = mgmt.address;
  const std::uint32_t mgmt_port = mgmt.listen_port;

  for (std::size_t k = 0; k < metadata.size(); ++k) {
    metadata[k].options.emplace_back("meta_shard", std::to_string(k));
    metadata[k].options.emplace_back("meta_shards", std::to_string(metadata.size()));
  }
  management[0].options.emplace_back("expected_metadata", std::to_string(metadata.size()));
  management[0].options.emplace_back("expected_storage", std::to_string(storage.size()));

  ServiceConfig client;
  client.id = "client";
  client.service = ServiceKind::client;
  client.options.emplace_back("stripe_count", std::to_string(policy.stripe_count));

  auto finish = [&](ServiceConfig& s) {
    s.mgmt_address = mgmt_address;
    s.mgmt_port = mgmt_port;
    s.options.emplace_back("stripe_size", std::to_string(policy.stripe_size_bytes));
    s.options.emplace_back("use_xattr", policy.enable_xattr_metadata ? "true" : "false");
    plan.startup_order.push_back(s.id);
    plan.services.push_back(std::move(s));
  };
  for (auto* group : {&management, &metadata, &storage, &monitoring}) {
    for (auto& s : *group) finish(s);
  }
  finish(client);
  return plan;
}

std::string render_config(const ServiceConfig& s) {
  std::ostringstream out;
  out << "# ephemstore " << to_string(s.service) << " service\n";
  out << "service = " << to_string(s.service) << "\n";
  out << "service_id = " << s.id << "\n";
  if (!s.node.empty()) {
    out << "node = " << s.node << "\n";
    out << "address = " << s.address << "\n";
  }
  if (!s.disk.empty()) out << "disk = " << s.disk << "\n";
  out << "listen_port = " << s.listen_port << "\n";
  out << "mgmt_address = " << s.mgmt_address << "\n";
  out << "mgmt_port = " << s.mgmt_port << "\n";
  if (!s.data_dir.empty()) out << "data_dir = " << s.data_dir.string() << "\n";
  for (const auto& [k, v] : s.options) out << k << " = " << v << "\n";
  return out.str();
}

std::vector<RenderedDocument> render_configs(const DeploymentPlan& plan) {
  std::vector<RenderedDocument> docs;
  for (const auto& s : plan.services) {
    std::string name = std::string(to_string(s.service));
    if (!s.node.empty()) name += "-" + s.node;
    if (s.service == ServiceKind::metadata || s.service == ServiceKind::storage) name += "-" + s.disk;
    docs.push_back(RenderedDocument{name + ".conf", render_config(s)});
  }
  return docs;
}

ServiceConfig parse_config(std::string_view document) {
  ServiceConfig s;
  std::istringstream in{std::string(document)};
  std::string raw;
  int lineno = 0;
  bool has_service = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      if (key == "service") {
        s.service = service_kind_from_string(value);
        has_service = true;
      } else if (key == "service_id") s.id = value;
      else if (key == "node") s.node = value;
      else if (key == "address") s.address = value;
      else if (key == "disk") s.disk = value;
      else if (key == "listen_port") s.listen_port = static_cast<std::uint32_t>(parse_uint(value));
      else if (key == "mgmt_address") s.mgmt_address = value;
      else if (key == "mgmt_port") s.mgmt_port = static_cast<std::uint32_t>(parse_uint(value));
      else if (key == "data_dir") s.data_dir = value;
      else s.options.emplace_back(key, value);
    } catch (const UsageError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!has_service) throw ParseError(lineno, "config has no 'service' key");
  return s;
}

std::string format_role_table(const DeploymentPlan& plan) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "node" << std::setw(12) << "disk" << std::setw(12) << "role"
      << "mount_root\n";
  for (const auto& a : plan.assignments) {
    out << std::left << std::setw(12) << a.node << std::setw(12) << a.disk << std::setw(12)
        << to_string(a.role) << a.mount_root.string() << "\n";
  }
  out << "metadata disks: " << plan.count(Role::metadata)
      << ", storage disks: " << plan.count(Role::storage)
      << ", management: " << plan.management().node << ":" << plan.management().disk << "\n";
  return out.str();
}

std::string format_plan(const DeploymentPlan& plan) {
  std::ostringstream out;
  out << "allocation " << plan.allocation.id << " nodes:";
  for (const auto& n : plan.allocation.nodes) out << " " << n.id;
  out << "\nstripe_size " << plan.policy.stripe_size_bytes << "\n";
  out << format_role_table(plan);
  out << "startup order:\n";
  for (std::size_t t = 0; const auto& tier : plan.tiers()) {
    out << "  tier " << t++ << ":";
    for (const auto* s : tier) out << " " << s->id << (s->listen_port ? ":" + std::to_string(s->listen_port) : "");
    out << "\n";
  }
  return out.str();
}

}  // namespace ephemstore::planner
