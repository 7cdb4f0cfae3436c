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

#include "ephemstore/cluster.hpp"

#include "ephemstore/error.hpp"

namespace ephemstore::ministore {

std::filesystem::path disk_directory(const std::filesystem::path& working_root, const std::string& node,
                                     const std::string& disk) {
  return working_root / "nodes" / node / disk;
}

LocalCluster::LocalCluster(planner::DeploymentPlan plan, std::filesystem::path working_root)
    : plan_(std::move(plan)), root_(std::move(working_root)), realm_(net::realm_for(root_)) {}

LocalCluster::~LocalCluster() { stop(); }

void LocalCluster::start() {
  try {
    for (const auto& tier : plan_.tiers()) {
      for (const auto* conf : tier) {
        if (conf->service == planner::ServiceKind::client) continue;
        ServiceOptions opts{*conf, disk_directory(root_, conf->node, conf->disk), realm_};
        auto svc = Service::create(std::move(opts));
        svc->start();
        Service* raw = svc.get();
        services_.push_back(std::move(svc));
        threads_.emplace_back([raw] { raw->run(); });
      }
    }
  } catch (...) {
    stop();
    throw;
  }
}

void LocalCluster::stop() {
  for (auto it = services_.rbegin(); it != services_.rend(); ++it) (*it)->request_stop();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
  services_.clear();
}

planner::ServiceConfig LocalCluster::client_config() const {
  auto conf = plan_.client_template();
  conf.options.emplace_back("realm", realm_);
  return conf;
}

Client LocalCluster::client() const { return Client::from_config(client_config(), realm_); }

}  // namespace ephemstore::ministore
