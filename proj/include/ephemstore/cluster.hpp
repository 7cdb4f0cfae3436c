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

#include <filesystem>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "ephemstore/client.hpp"
#include "ephemstore/planner.hpp"
#include "ephemstore/services.hpp"

namespace ephemstore::ministore {

// Directory standing in for disk `disk` of node `node` in a local deployment.
std::filesystem::path disk_directory(const std::filesystem::path& working_root, const std::string& node,
                                     const std::string& disk);

// Runs every daemon of a plan inside the current process, one thread per
// service. Used by tests and benchmarks that do not need process isolation.
class LocalCluster {
 public:
  LocalCluster(planner::DeploymentPlan plan, std::filesystem::path working_root);
  ~LocalCluster();
  LocalCluster(const LocalCluster&) = delete;
  LocalCluster& operator=(const LocalCluster&) = delete;

  // Starts services tier by tier; throws if any fails.
  void start();
  void stop();

  Client client() const;
  planner::ServiceConfig client_config() const;
  const std::string& realm() const { return realm_; }
  const planner::DeploymentPlan& plan() const { return plan_; }
  const std::filesystem::path& working_root() const { return root_; }
  std::filesystem::path disk_dir(const std::string& node, const std::string& disk) const {
    return disk_directory(root_, node, disk);
  }

 private:
  planner::DeploymentPlan plan_;
  std::filesystem::path root_;
  std::string realm_;
  std::vector<std::unique_ptr<Service>> services_;
  std::vector<std::thread> threads_;
};

}  // namespace ephemstore::ministore
