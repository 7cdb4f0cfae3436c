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

#include "ephemstore/inventory.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>

#include "ephemstore/error.hpp"
#include "ephemstore/units.hpp"

namespace ephemstore::inventory {

std::string_view to_string(NodeKind kind) {
  return kind == NodeKind::storage ? "storage" : "compute";
}

std::string_view to_string(Purpose purpose) {
  return purpose == Purpose::storage ? "storage" : "compute";
}

std::string_view to_string(AllocationState state) {
  switch (state) {
    case AllocationState::granted: return "granted";
    case AllocationState::active: return "active";
    case AllocationState::released: return "released";
  }
  return "?";
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t parse_number(int line, std::string_view key, std::string_view value) {
  try {
    return parse_uint(value);
  } catch (const UsageError&) {
    throw ParseError(line, std::string(key) + " expects a non-negative integer, got '" +
                               std::string(value) + "'");
  }
}

struct PendingNode {
  NodeSpec spec;
  int header_line = 0;
  bool has_kind = false;
  bool has_dram = false;
  std::map<std::string, int> disk_lines;
};

void finish_node(const PendingNode& p) {
  const NodeSpec& n = p.spec;
  const int line = p.header_line;
  if (!p.has_kind) throw ParseError(line, "node " + n.id + " has no kind");
  if (!p.has_dram || n.dram_bytes == 0) throw ParseError(line, "node " + n.id + " needs dram_bytes > 0");
  if (n.kind == NodeKind::storage && n.disks.empty()) {
    throw ParseError(line, "storage node " + n.id + " declares no disks");
  }
  if (n.kind == NodeKind::storage && !n.has_feature(kStorageFeature)) {
    throw ParseError(line, "storage node " + n.id + " must carry the 'storage' feature");
  }
  if (n.kind == NodeKind::compute && n.has_feature(kStorageFeature)) {
    throw ParseError(line, "compute node " + n.id + " carries the 'storage' feature");
  }
  if (n.kind == NodeKind::compute && !n.disks.empty() && !n.has_feature(kLocalStorageFeature)) {
    throw ParseError(p.disk_lines.begin()->second,
                     "disk declared on compute node " + n.id + " without 'local-storage' feature");
  }
}

}  // namespace

std::vector<NodeSpec> load_inventory(std::string_view document) {
  std::vector<NodeSpec> nodes;
  std::set<std::string> seen;
  std::optional<PendingNode> current;

  auto flush = [&] {
    if (!current) return;
    finish_node(*current);
    nodes.push_back(std::move(current->spec));
    current.reset();
  };

  std::istringstream in{std::string(document)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "unterminated section header");
      std::string body = trim(std::string_view(line).substr(1, line.size() - 2));
      if (body.rfind("node", 0) != 0 || body.size() < 5 || !std::isspace(static_cast<unsigned char>(body[4]))) {
        throw ParseError(lineno, "expected '[node <id>]'");
      }
      std::string id = trim(std::string_view(body).substr(4));
      if (id.empty() || id.find_first_of(" \t,") != std::string::npos) {
        throw ParseError(lineno, "bad node id '" + id + "'");
      }
      flush();
      if (!seen.insert(id).second) throw ParseError(lineno, "duplicate node id " + id);
      current.emplace();
      current->spec.id = id;
      current->spec.address = id;
      current->header_line = lineno;
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    if (!current) throw ParseError(lineno, "key outside a [node] section");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    NodeSpec& n = current->spec;

    if (key == "address") {
      if (value.empty()) throw ParseError(lineno, "empty address");
      n.address = value;
    } else if (key == "kind") {
      if (value == "compute") n.kind = NodeKind::compute;
      else if (value == "storage") n.kind = NodeKind::storage;
      else throw ParseError(lineno, "kind must be compute or storage, got '" + value + "'");
      current->has_kind = true;
    } else if (key == "features") {
      n.features.clear();
      if (!value.empty()) {
        for (auto& f : split(value, ',')) {
          if (f.empty()) throw ParseError(lineno, "empty feature name");
          n.features.insert(f);
        }
      }
    } else if (key == "cpus") {
      n.cpus = static_cast<std::uint32_t>(parse_number(lineno, key, value));
    } else if (key == "dram_bytes") {
      n.dram_bytes = parse_number(lineno, key, value);
      current->has_dram = true;
    } else if (key == "disk") {
      auto fields = split(value, ',');
      if (fields.size() != 5) {
        throw ParseError(lineno, "disk expects <id>,<mount_root>,<capacity_bytes>,<read_bw>,<write_bw>");
      }
      DiskSpec d;
      d.id = fields[0];
      d.mount_root = fields[1];
      if (d.id.empty()) throw ParseError(lineno, "empty disk id");
      if (d.mount_root.empty() || !d.mount_root.is_absolute()) {
        throw ParseError(lineno, "disk mount_root must be an absolute path");
      }
      d.capacity_bytes = parse_number(lineno, "capacity_bytes", fields[2]);
      d.nominal_read_bw = parse_number(lineno, "read_bw", fields[3]);
      d.nominal_write_bw = parse_number(lineno, "write_bw", fields[4]);
      if (d.capacity_bytes == 0) throw ParseError(lineno, "disk " + d.id + " has zero capacity");
      if (!current->disk_lines.emplace(d.id, lineno).second) {
        throw ParseError(lineno, "duplicate disk id " + d.id + " on node " + n.id);
      }
      n.disks.push_back(std::move(d));
    } else {
      throw ParseError(lineno, "unknown key '" + key + "'");
    }
  }
  flush();
  return nodes;
}

std::vector<NodeSpec> load_inventory_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open inventory " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_inventory(buf.str());
}

std::vector<std::string> Allocation::node_ids() const {
  std::vector<std::string> ids;
  ids.reserve(nodes.size());
  for (const auto& n : nodes) ids.push_back(n.id);
  return ids;
}

bool eligible_for(const NodeSpec& node, Purpose purpose) {
  if (purpose == Purpose::compute) return node.kind == NodeKind::compute;
  return node.kind == NodeKind::storage ||
         (node.has_feature(kLocalStorageFeature) && !node.disks.empty());
}

AllocationRegistry::AllocationRegistry(std::vector<NodeSpec> inventory)
    : inventory_(std::move(inventory)) {
  for (const auto& n : inventory_) features_.insert(n.features.begin(), n.features.end());
}

Allocation AllocationRegistry::request(const AllocationRequest& req) {
  if (req.count < 1) throw UsageError("allocation count must be >= 1");
  if (inventory_.empty()) throw AllocationError("inventory is empty");
  Constraint constraint = Constraint::parse(req.constraint);
  for (const auto& lit : constraint.literals()) {
    if (!features_.count(lit)) throw UsageError("unknown feature '" + lit + "' in constraint");
  }

  std::unique_lock lock(mutex_);
  std::set<std::string> held;
  for (const auto& [id, a] : allocations_) {
    if (a.state != AllocationState::released && a.purpose == req.purpose) {
      for (const auto& n : a.nodes) held.insert(n.id);
    }
  }

  std::vector<const NodeSpec*> eligible;
  for (const auto& n : inventory_) {
    if (eligible_for(n, req.purpose) && constraint.matches(n.features) && !held.count(n.id)) {
      eligible.push_back(&n);
    }
  }
  if (eligible.size() < req.count) throw InsufficientNodes(req.count, eligible.size());
  std::sort(eligible.begin(), eligible.end(),
            [](const NodeSpec* a, const NodeSpec* b) { return a->id < b->id; });

  Allocation alloc;
  alloc.id = "alloc-" + std::to_string(next_id_++);
  alloc.purpose = req.purpose;
  alloc.constraint = constraint.text();
  for (std::size_t i = 0; i < req.count; ++i) alloc.nodes.push_back(*eligible[i]);
  allocations_.emplace(alloc.id, alloc);
  return alloc;
}

Allocation AllocationRegistry::activate(const Allocation& alloc) {
  std::unique_lock lock(mutex_);
  auto it = allocations_.find(alloc.id);
  if (it == allocations_.end()) throw StateError("unknown allocation " + alloc.id);
  if (it->second.state != AllocationState::granted) {
    throw StateError("allocation " + alloc.id + " is " + std::string(to_string(it->second.state)));
  }
  it->second.state = AllocationState::active;
  return it->second;
}

Allocation AllocationRegistry::release(const Allocation& alloc) {
  std::unique_lock lock(mutex_);
  auto it = allocations_.find(alloc.id);
  if (it == allocations_.end()) throw StateError("unknown allocation " + alloc.id);
  if (it->second.state == AllocationState::released) {
    throw StateError("allocation " + alloc.id + " already released");
  }
  it->second.state = AllocationState::released;
  return it->second;
}

std::vector<Allocation> AllocationRegistry::allocations() const {
  std::shared_lock lock(mutex_);
  std::vector<Allocation> out;
  for (const auto& [id, a] : allocations_) out.push_back(a);
  return out;
}

}  // namespace ephemstore::inventory
