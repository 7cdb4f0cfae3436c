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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <sys/types.h>

#include "ephemstore/planner.hpp"
#include "ephemstore/socket.hpp"

namespace ephemstore::executor {

enum class Backend { local_process, external_emit };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view text);  // "local" or "emit"

// Name of the state file kept in the working root of a live deployment.
inline constexpr const char* kStateFileName = "deployment.state";
inline constexpr const char* kLaunchManifestName = "launch.manifest";

struct NodeExecutor {
  Backend backend = Backend::local_process;
  std::filesystem::path working_root;
  // Empty: EPHEMSTORE_DAEMON, then next to the running binary, then the
  // build-tree daemon.
  std::filesystem::path daemon_path;
  std::chrono::milliseconds health_timeout{15000};

  // working_root, unless EPHEMSTORE_ROOT is set.
  std::filesystem::path root() const;
  std::filesystem::path daemon() const;
};

enum class ServiceState { pending, running, failed, stopped };

std::string_view to_string(ServiceState state);
ServiceState service_state_from_string(std::string_view text);

struct ServiceRecord {
  std::string id;
  planner::ServiceKind kind = planner::ServiceKind::storage;
  std::string node;
  std::string disk;
  std::string registry_id;  // what the service registers as
  ServiceState state = ServiceState::pending;
  pid_t pid = 0;
  net::Endpoint endpoint;
  std::filesystem::path data_dir;
  std::filesystem::path config_path;
  std::string error;
};

struct DeploymentHandle {
  planner::DeploymentPlan plan;
  Backend backend = Backend::local_process;
  std::filesystem::path working_root;
  std::string realm;
  std::vector<ServiceRecord> services;  // startup order, client excluded
  std::map<std::string, std::filesystem::path> client_mounts;
  std::vector<std::pair<std::string, double>> timings;  // phase, seconds

  std::map<std::string, ServiceState> service_states() const;
  const ServiceRecord* find(const std::string& id) const;
  bool all_running() const;
  bool failed() const;
  // Message of the first failed service; empty when none failed.
  std::string failure() const;
  std::optional<double> timing(const std::string& phase) const;
  // Distinct per-disk data directories, in plan order.
  std::vector<std::filesystem::path> disk_directories() const;

  std::filesystem::path state_path() const { return working_root / kStateFileName; }
  void save() const;
  // `plan` is re-derived by the caller; the state file records runtime data.
  // Throws StateError when no state file exists.
  static DeploymentHandle load(const std::filesystem::path& working_root, planner::DeploymentPlan plan);
};

// Launches the plan tier by tier. A failing service leaves the returned
// handle in failed state with every other service stopped. Throws
// PortCollision (before launching anything) when an endpoint is taken and
// UsageError when the working root cannot be used.
DeploymentHandle deploy(const planner::DeploymentPlan& plan, const NodeExecutor& exec);

// Writes one client configuration per compute node under
// <root>/clients/<node>. Throws ManagementUnreachable or AlreadyExists.
DeploymentHandle& attach_clients(DeploymentHandle& handle, const std::vector<inventory::NodeSpec>& compute_nodes);

struct DiskScrub {
  std::filesystem::path disk;
  std::uint64_t entries_removed = 0;
  std::uint64_t bytes_scrubbed = 0;
  std::uint64_t residual_entries = 0;
};

struct TeardownReport {
  std::vector<std::string> stopped;
  std::vector<std::string> residuals;  // best-effort problems
  std::vector<DiskScrub> disks;
  std::size_t mounts_removed = 0;

  std::size_t actions() const;
  std::uint64_t bytes_scrubbed() const;
  std::uint64_t residual_entries() const;
  void write_csv(std::ostream& out) const;
};

// Never throws for service or disk problems; they land in residuals.
TeardownReport teardown(DeploymentHandle& handle);

enum class StageDirection { in, out };

// Recursive copy between a host path and the deployed namespace; returns
// bytes copied. `in` reads host path `src` into namespace path `dst`, `out`
// the reverse. Throws NotFound when the source is missing.
std::uint64_t stage(const DeploymentHandle& handle, StageDirection direction, const std::string& src,
                    const std::string& dst);

// Daemons still running from `working_root`, found by scanning /proc.
std::vector<pid_t> find_daemons(const std::filesystem::path& working_root);

}  // namespace ephemstore::executor
