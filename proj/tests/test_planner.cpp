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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "ephemstore/error.hpp"
#include "ephemstore/planner.hpp"
#include "support.hpp"

using namespace ephemstore;
using namespace ephemstore::planner;
using testsupport::make_plan;

namespace {

std::vector<std::string> disks_with(const DeploymentPlan& plan, Role role) {
  std::vector<std::string> out;
  for (const auto& a : plan.assignments) {
    if (a.role == role) out.push_back(a.node + ":" + a.disk);
  }
  return out;
}

}  // namespace

TEST_CASE("Dom policy on two DataWarp nodes") {
  auto plan = make_plan(testsupport::dom_inventory(), 2, DeploymentPolicy::dom());
  CHECK(plan.count(Role::metadata) == 2);
  CHECK(plan.count(Role::storage) == 4);
  CHECK(disks_with(plan, Role::metadata) == std::vector<std::string>{"dw01:nvme0n1", "dw02:nvme0n1"});
  CHECK(disks_with(plan, Role::storage) ==
        std::vector<std::string>{"dw01:nvme1n1", "dw01:nvme2n1", "dw02:nvme1n1", "dw02:nvme2n1"});
  CHECK(disks_with(plan, Role::management) == std::vector<std::string>{"dw01:nvme0n1"});
  CHECK(disks_with(plan, Role::monitoring) == std::vector<std::string>{"dw01:nvme0n1"});

  const auto& mgmt = plan.management();
  CHECK(mgmt.id == "management@dw01");
  CHECK(mgmt.listen_port == 8000);
  CHECK(mgmt.option("expected_metadata") == "2");
  CHECK(mgmt.option("expected_storage") == "4");
  CHECK(plan.service("metadata@dw02:nvme0n1").listen_port == 8010);
  CHECK(plan.service("storage@dw01:nvme2n1").listen_port == 8021);
  CHECK(plan.service("storage@dw01:nvme2n1").option("target_id") == "dw01:nvme2n1");
  CHECK(plan.service("storage@dw01:nvme2n1").data_dir == "/mnt/dw01/nvme2n1");
  CHECK(plan.service("monitoring@dw01").listen_port == 8030);
  CHECK(plan.service("metadata@dw02:nvme0n1").option("meta_shard") == "1");
  CHECK(plan.client_template().mgmt_port == 8000);
  CHECK(plan.client_template().mgmt_address == "dw01");
  CHECK_THROWS(plan.service("nope"));

  // Eight daemons plus the client template.
  CHECK(plan.services.size() == 9);
  CHECK(plan.startup_order.size() == 9);
  CHECK(plan.startup_order.front() == "management@dw01");
  CHECK(plan.startup_order.back() == "client");
}

TEST_CASE("Dom policy over all four storage nodes") {
  auto plan = make_plan(testsupport::dom_inventory(), 4, DeploymentPolicy::dom());
  CHECK(plan.count(Role::metadata) == 4);
  CHECK(plan.count(Role::storage) == 8);
}

TEST_CASE("Ault policy uses eight of sixteen disks") {
  auto plan = make_plan(testsupport::ault_inventory(), 1, DeploymentPolicy::ault());
  CHECK(disks_with(plan, Role::management) == std::vector<std::string>{"ault01:nvme0n1"});
  CHECK(disks_with(plan, Role::monitoring) == std::vector<std::string>{"ault01:nvme0n1"});
  CHECK(disks_with(plan, Role::metadata) == std::vector<std::string>{"ault01:nvme1n1", "ault01:nvme2n1"});
  CHECK(disks_with(plan, Role::storage) ==
        std::vector<std::string>{"ault01:nvme3n1", "ault01:nvme4n1", "ault01:nvme5n1", "ault01:nvme6n1",
                                 "ault01:nvme7n1"});
  std::set<std::string> used;
  for (const auto& a : plan.assignments) used.insert(a.disk);
  CHECK(used.size() == 8);
}

TEST_CASE("startup tiers") {
  auto plan = make_plan(testsupport::dom_inventory(), 2, DeploymentPolicy::dom());
  auto tiers = plan.tiers();
  REQUIRE(tiers.size() == 5);
  const std::vector<ServiceKind> order = {ServiceKind::management, ServiceKind::metadata, ServiceKind::storage,
                                          ServiceKind::monitoring, ServiceKind::client};
  const std::vector<std::size_t> sizes = {1, 2, 4, 1, 1};
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    CHECK(tiers[t].size() == sizes[t]);
    for (const auto* s : tiers[t]) CHECK(s->service == order[t]);
  }
}

TEST_CASE("insufficient disks names the node") {
  auto inv = testsupport::local_inventory(2, 2);
  try {
    make_plan(inv, 2, DeploymentPolicy::dom());
    FAIL("expected InsufficientDisks");
  } catch (const InsufficientDisks& e) {
    CHECK(e.node() == "ls01");
    CHECK(std::string(e.what()).find("ls01") != std::string::npos);
  }
  CHECK_THROWS_AS(make_plan(testsupport::local_inventory(1, 7), 1, DeploymentPolicy::ault()), InsufficientDisks);
  CHECK_NOTHROW(make_plan(testsupport::local_inventory(1, 8), 1, DeploymentPolicy::ault()));
}

TEST_CASE("policy validation") {
  auto p = DeploymentPolicy::dom();
  p.stripe_size_bytes = 0;
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = DeploymentPolicy::dom();
  p.storage_disks_per_node = 0;
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = DeploymentPolicy::dom();
  p.dedicated_mgmt_disks = 1;
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = DeploymentPolicy::ault();
  p.dedicated_mgmt_disks = 3;
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = DeploymentPolicy::dom();
  p.storage_disks_per_node = 11;
  CHECK_THROWS_AS(p.validate(), UsageError);
  p = DeploymentPolicy::dom();
  p.base_port = 65530;
  CHECK_THROWS_AS(p.validate(), UsageError);
  CHECK_NOTHROW(DeploymentPolicy::dom().validate());
  CHECK_NOTHROW(DeploymentPolicy::ault().validate());
}

TEST_CASE("rendered documents") {
  auto plan = make_plan(testsupport::dom_inventory(), 2, DeploymentPolicy::dom());
  auto docs = render_configs(plan);
  REQUIRE(docs.size() == 9);
  std::size_t meta = 0, storage = 0;
  std::set<std::string> names;
  for (const auto& d : docs) {
    names.insert(d.path.string());
    meta += d.path.string().rfind("metadata-", 0) == 0;
    storage += d.path.string().rfind("storage-", 0) == 0;
  }
  CHECK(names.size() == 9);
  CHECK(meta == 2);
  CHECK(storage == 4);
  CHECK(names.count("management-dw01.conf"));
  CHECK(names.count("monitoring-dw01.conf"));
  CHECK(names.count("storage-dw02-nvme2n1.conf"));
  CHECK(names.count("client.conf"));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(parse_config(docs[i].content) == plan.services[i]);
  }
}

TEST_CASE("parse_config errors") {
  CHECK_THROWS_AS(parse_config("service = storage\nbroken line\n"), ParseError);
  CHECK_THROWS_AS(parse_config("listen_port = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("service = warp\n"), ParseError);
}

TEST_CASE("plans are deterministic and ports unique per address") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t nodes = 1 + rng() % 4;
    const std::size_t disks = 4 + rng() % 5;
    DeploymentPolicy p;
    p.meta_disks_per_node = 1 + static_cast<std::uint32_t>(rng() % 2);
    p.storage_disks_per_node = 1 + static_cast<std::uint32_t>(rng() % (disks - p.meta_disks_per_node - 1));
    if (rng() % 2) {
      p.colocate_mgmt_on_first_meta = false;
      p.dedicated_mgmt_disks = 1;
    }
    p.base_port = 9000 + static_cast<std::uint32_t>(rng() % 1000);
    const auto inv = testsupport::local_inventory(nodes, disks);
    auto a = make_plan(inv, nodes, p);
    auto b = make_plan(inv, nodes, p);
    CHECK(a == b);
    CHECK(a.count(Role::metadata) == nodes * p.meta_disks_per_node);
    CHECK(a.count(Role::storage) == nodes * p.storage_disks_per_node);
    std::set<std::pair<std::string, std::uint32_t>> endpoints;
    for (const auto& s : a.services) {
      if (s.service == ServiceKind::client) continue;
      CHECK(endpoints.insert({s.address, s.listen_port}).second);
    }
    // No disk carries both data roles.
    const auto meta_list = disks_with(a, Role::metadata);
    std::set<std::string> meta(meta_list.begin(), meta_list.end());
    for (const auto& d : disks_with(a, Role::storage)) CHECK_FALSE(meta.count(d));
  }
}

TEST_CASE("role table") {
  auto plan = make_plan(testsupport::dom_inventory(), 2, DeploymentPolicy::dom());
  auto table = format_role_table(plan);
  CHECK(table.find("metadata disks: 2, storage disks: 4, management: dw01:nvme0n1") != std::string::npos);
  CHECK(format_plan(plan).find("tier 0: management@dw01:8000") != std::string::npos);
}
