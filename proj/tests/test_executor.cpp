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

#include <signal.h>

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ephemstore/client.hpp"
#include "ephemstore/error.hpp"
#include "ephemstore/executor.hpp"
#include "support.hpp"

using namespace ephemstore;
using namespace ephemstore::executor;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  std::string inv = testsupport::local_inventory(2, 3);
  planner::DeploymentPlan plan = testsupport::make_plan(inv, 2, planner::DeploymentPolicy::dom());
  testsupport::TempDir dir{"exec"};
  NodeExecutor exec;

  Fixture() {
    exec.working_root = dir.path() / "root";
    exec.daemon_path = testsupport::daemon_path();
  }

  std::vector<inventory::NodeSpec> compute() const {
    std::vector<inventory::NodeSpec> out;
    for (auto& n : inventory::load_inventory(inv)) {
      if (n.kind == inventory::NodeKind::compute) out.push_back(n);
    }
    return out;
  }
};

// Tears down whatever a test leaves behind.
struct Guard {
  DeploymentHandle& h;
  ~Guard() { teardown(h); }
};

std::size_t entries_under(const fs::path& p) {
  std::size_t n = 0;
  for (auto it = fs::recursive_directory_iterator(p); it != fs::recursive_directory_iterator(); ++it) ++n;
  return n;
}

}  // namespace

TEST_CASE("deploy brings up every service and records timings") {
  Fixture f;
  auto h = deploy(f.plan, f.exec);
  Guard g{h};
  REQUIRE_MESSAGE(h.all_running(), h.failure());
  CHECK(h.services.size() == 8);  // mgmt, 2 meta, 4 storage, monitoring
  std::set<std::string> ids;
  for (const auto& s : h.services) {
    CHECK(s.state == ServiceState::running);
    CHECK(s.pid > 0);
    ids.insert(s.id);
  }
  CHECK(ids.size() == 8);
  auto total = h.timing("deploy");
  REQUIRE(total.has_value());
  CHECK(*total > 0);
  double tiers = 0;
  for (const auto& [phase, secs] : h.timings) {
    if (phase.rfind("tier:", 0) == 0) tiers += secs;
  }
  CHECK(tiers > 0);
  CHECK(tiers <= *total + 1e-6);
  CHECK(*total - tiers < 0.5);  // only spawn bookkeeping between tiers
  CHECK(find_daemons(h.working_root).size() == 8);
  CHECK(fs::exists(h.state_path()));
}

TEST_CASE("a failing storage service fails the deployment and stops the rest") {
  Fixture f;
  const auto* victim = f.plan.of_kind(planner::ServiceKind::storage).back();
  const fs::path data = ministore::disk_directory(f.exec.working_root, victim->node, victim->disk);
  fs::create_directories(data);
  fs::permissions(data, fs::perms::owner_read | fs::perms::owner_exec | fs::perms::group_read |
                            fs::perms::group_exec | fs::perms::others_read | fs::perms::others_exec);
  auto h = deploy(f.plan, f.exec);
  CHECK(h.failed());
  CHECK_FALSE(h.all_running());
  const auto* rec = h.find(victim->id);
  REQUIRE(rec != nullptr);
  CHECK(rec->state == ServiceState::failed);
  CHECK(rec->error.find("read-only") != std::string::npos);
  CHECK(h.failure().find(victim->id) != std::string::npos);
  for (const auto& s : h.services) {
    if (s.id != victim->id) CHECK(s.state != ServiceState::running);
  }
  CHECK(find_daemons(h.working_root).empty());
  CHECK_FALSE(fs::exists(h.state_path()));
  fs::permissions(data, fs::perms::owner_all);
}

TEST_CASE("a second deployment on the same root collides") {
  Fixture f;
  auto h = deploy(f.plan, f.exec);
  Guard g{h};
  REQUIRE(h.all_running());
  CHECK_THROWS_AS(deploy(f.plan, f.exec), PortCollision);
  CHECK(find_daemons(h.working_root).size() == 8);
  CHECK(h.all_running());
}

TEST_CASE("an unusable working root names the path") {
  Fixture f;
  testsupport::write_file(f.dir.path() / "file", "x");
  f.exec.working_root = f.dir.path() / "file" / "root";
  try {
    deploy(f.plan, f.exec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(f.exec.working_root.string()) != std::string::npos);
  }
  f.exec.working_root.clear();
  CHECK_THROWS_AS(deploy(f.plan, f.exec), UsageError);
}

TEST_CASE("attach clients") {
  Fixture f;
  auto compute = f.compute();
  REQUIRE(compute.size() == 2);

  SUBCASE("before deploy") {
    DeploymentHandle h;
    h.plan = f.plan;
    h.working_root = f.exec.working_root;
    h.realm = net::realm_for(f.dir.path());
    CHECK_THROWS_AS(attach_clients(h, compute), ManagementUnreachable);
  }

  SUBCASE("after deploy") {
    auto h = deploy(f.plan, f.exec);
    Guard g{h};
    REQUIRE(h.all_running());
    auto before = h.client_mounts;
    attach_clients(h, {});
    CHECK(h.client_mounts == before);

    attach_clients(h, compute);
    REQUIRE(h.client_mounts.size() == 2);
    for (const auto& [node, point] : h.client_mounts) {
      CHECK(fs::exists(point / ministore::kClientConfigName));
      auto client = ministore::Client::attach(point);
      client.create("/from-" + node);
    }
    auto client = ministore::Client::attach(h.client_mounts.begin()->second);
    CHECK(client.readdir("/").size() == 2);
    CHECK_THROWS_AS(attach_clients(h, {compute[0]}), AlreadyExists);

    auto loaded = DeploymentHandle::load(h.working_root, f.plan);
    CHECK(loaded.client_mounts == h.client_mounts);

    auto report = teardown(h);
    CHECK(report.mounts_removed == 2);
    CHECK_FALSE(fs::exists(h.working_root / "clients"));
  }
}

TEST_CASE("teardown scrubs every disk and is idempotent") {
  Fixture f;
  auto h = deploy(f.plan, f.exec);
  REQUIRE(h.all_running());
  attach_clients(h, f.compute());
  auto client = ministore::Client::attach(h.client_mounts.begin()->second);
  std::vector<std::uint8_t> data(300 * 1024, 7);
  for (int i = 0; i < 20; ++i) {
    auto meta = client.create("/f" + std::to_string(i));
    client.write_at(meta, 0, data);
  }
  std::uint64_t before = 0;
  for (const auto& d : h.disk_directories()) {
    for (auto& e : fs::recursive_directory_iterator(d)) {
      if (e.is_regular_file()) before += e.file_size();
    }
  }

  auto report = teardown(h);
  CHECK(report.residuals.empty());
  CHECK(report.stopped.size() == 8);
  CHECK(report.disks.size() == h.disk_directories().size());
  CHECK(report.residual_entries() == 0);
  CHECK(report.bytes_scrubbed() >= before);  // services flush state when they stop
  CHECK(report.bytes_scrubbed() >= 20 * data.size());
  for (const auto& d : h.disk_directories()) {
    CHECK(fs::is_directory(d));
    CHECK(entries_under(d) == 0);
  }
  CHECK(find_daemons(h.working_root).empty());
  CHECK_FALSE(fs::exists(h.state_path()));
  for (const auto& s : h.services) CHECK(s.state == ServiceState::stopped);

  std::ostringstream csv;
  report.write_csv(csv);
  CHECK(csv.str().rfind("disk,residual_entries,bytes_scrubbed\n", 0) == 0);

  auto again = teardown(h);
  CHECK(again.actions() == 0);
  CHECK(again.residuals.empty());
  CHECK_THROWS_AS(DeploymentHandle::load(h.working_root, f.plan), StateError);
}

TEST_CASE("teardown flags a service that does not answer") {
  Fixture f;
  auto h = deploy(f.plan, f.exec);
  REQUIRE(h.all_running());
  const auto& frozen = h.services.back();
  ::kill(frozen.pid, SIGSTOP);
  auto report = teardown(h);
  REQUIRE_FALSE(report.residuals.empty());
  bool flagged = false;
  for (const auto& r : report.residuals) flagged = flagged || r.find(frozen.id) != std::string::npos;
  CHECK(flagged);
  CHECK(find_daemons(h.working_root).empty());
}

TEST_CASE("staging in and out") {
  Fixture f;
  auto h = deploy(f.plan, f.exec);
  Guard g{h};
  REQUIRE(h.all_running());

  std::string blob(kMiB, '\0');
  for (std::size_t i = 0; i < blob.size(); ++i) blob[i] = static_cast<char>((i * 131) >> 3);
  testsupport::write_file(f.dir / "blob", blob);
  CHECK(stage(h, StageDirection::in, (f.dir / "blob").string(), "/in/blob") == kMiB);
  CHECK(stage(h, StageDirection::out, "/in/blob", (f.dir / "back.bin").string()) == kMiB);
  CHECK(testsupport::read_file(f.dir / "back.bin") == blob);

  fs::create_directories(f.dir / "tree" / "sub");
  testsupport::write_file(f.dir / "tree" / "a", "alpha");
  testsupport::write_file(f.dir / "tree" / "sub" / "b", std::string(200000, 'b'));
  testsupport::write_file(f.dir / "tree" / "sub" / "c", "");
  CHECK(stage(h, StageDirection::in, (f.dir / "tree").string(), "/results") == 200005);
  CHECK(stage(h, StageDirection::out, "/results", (f.dir / "out").string()) == 200005);
  CHECK(testsupport::read_file(f.dir / "out" / "a") == "alpha");
  CHECK(testsupport::read_file(f.dir / "out" / "sub" / "b") == std::string(200000, 'b'));
  CHECK(fs::exists(f.dir / "out" / "sub" / "c"));

  CHECK_THROWS_AS(stage(h, StageDirection::in, (f.dir / "missing").string(), "/x"), NotFound);
  CHECK_THROWS_AS(stage(h, StageDirection::out, "/missing", (f.dir / "x").string()), NotFound);
}

TEST_CASE("deploy, teardown, deploy") {
  Fixture f;
  for (int round = 0; round < 2; ++round) {
    auto h = deploy(f.plan, f.exec);
    REQUIRE_MESSAGE(h.all_running(), h.failure());
    auto client = ministore::Client::from_config(h.plan.client_template(), h.realm);
    CHECK(client.readdir("/").empty());
    client.create("/round");
    auto report = teardown(h);
    CHECK(report.residuals.empty());
  }
}

TEST_CASE("state file round trip") {
  Fixture f;
  auto h = deploy(f.plan, f.exec);
  Guard g{h};
  REQUIRE(h.all_running());
  auto loaded = DeploymentHandle::load(h.working_root, f.plan);
  CHECK(loaded.realm == h.realm);
  CHECK(loaded.backend == h.backend);
  REQUIRE(loaded.services.size() == h.services.size());
  for (std::size_t i = 0; i < h.services.size(); ++i) {
    CHECK(loaded.services[i].id == h.services[i].id);
    CHECK(loaded.services[i].pid == h.services[i].pid);
    CHECK(loaded.services[i].state == h.services[i].state);
    CHECK(loaded.services[i].endpoint.to_string() == h.services[i].endpoint.to_string());
    CHECK(loaded.services[i].data_dir == h.services[i].data_dir);
  }
  CHECK(loaded.timing("deploy") == doctest::Approx(*h.timing("deploy")).epsilon(1e-3));
}

TEST_CASE("emit backend writes a launch manifest") {
  Fixture f;
  f.exec.backend = Backend::external_emit;
  auto h = deploy(f.plan, f.exec);
  CHECK(find_daemons(h.working_root).empty());
  const std::string manifest = testsupport::read_file(h.working_root / kLaunchManifestName);
  std::istringstream in(manifest);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == f.plan.services.size());
  CHECK(lines.front().rfind("tier 1: " + f.plan.management().node + " management ", 0) == 0);
  CHECK(lines.back().rfind("tier 5: * client ", 0) == 0);
  int last_tier = 0;
  for (const auto& line : lines) {
    const int tier = std::stoi(line.substr(5));
    CHECK(tier >= last_tier);
    last_tier = tier;
    const auto path = line.substr(line.rfind(' ') + 1);
    CHECK(fs::exists(path));
  }
  CHECK(fs::exists(h.working_root / "mapping.txt"));
  CHECK(testsupport::read_file(h.working_root / "mapping.txt").find("beegfs-storage") != std::string::npos);
  auto loaded = DeploymentHandle::load(h.working_root, f.plan);
  CHECK(loaded.backend == Backend::external_emit);
  auto report = teardown(h);
  CHECK(report.stopped.empty());
  CHECK(report.residuals.empty());
}

TEST_CASE("backend names") {
  CHECK(backend_from_string("local") == Backend::local_process);
  CHECK(backend_from_string("emit") == Backend::external_emit);
  CHECK_THROWS_AS(backend_from_string("slurm"), UsageError);
  CHECK(to_string(Backend::external_emit) == "emit");
}
