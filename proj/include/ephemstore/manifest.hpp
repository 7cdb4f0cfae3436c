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
#include <string>
#include <vector>

#include "ephemstore/planner.hpp"

namespace ephemstore::cli {

inline constexpr const char* kManifestName = "run.manifest";
inline constexpr const char* kLockName = ".lock";

// Everything a later command needs to rebuild the run: the plan is derived
// again from inventory + policy, which is deterministic.
struct RunManifest {
  std::filesystem::path inventory;
  std::uint32_t storage_nodes = 0;
  std::string constraint = "storage";
  std::string policy_name = "dom";
  planner::DeploymentPolicy policy = planner::DeploymentPolicy::dom();
  std::vector<std::string> allocation_ids;
  std::string backend = "local";
  std::filesystem::path working_root;  // empty until deployed
  std::filesystem::path out_dir;
  std::vector<std::string> bench_runs;  // result CSV file names

  void save() const;
  // Throws StateError when `out_dir` holds no manifest.
  static RunManifest load(const std::filesystem::path& out_dir);
  static bool exists(const std::filesystem::path& out_dir);
};

// Exclusive flock on <out_dir>/.lock for the life of the object. Throws
// StateError when another command holds it.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& out_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace ephemstore::cli
