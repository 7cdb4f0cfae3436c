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

// Acceptance run: one PASS/FAIL line per criterion; exit status 1 when any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "ephemstore/bench.hpp"
#include "ephemstore/client.hpp"
#include "ephemstore/error.hpp"
#include "ephemstore/executor.hpp"
#include "ephemstore/planner.hpp"
#include "support.hpp"

using namespace ephemstore;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail.str("");
      detail << what;
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void cache_fit(Outcome& o) {
  const auto t0 = Clock::now();
  auto r = bench::predict_per_node_volume(8, 36, 512000000ULL, 2, 64000000000ULL);
  const double secs = seconds_since(t0);
  o.require(r.per_node_volume_bytes == 73728000000ULL, "volume " + std::to_string(r.per_node_volume_bytes));
  o.require(!r.fits, "reported as fitting in 64e9 bytes of DRAM");
  o.require(secs < 1e-3, "took " + std::to_string(secs) + " s");
  o.detail << r.per_node_volume_bytes << " B per node, fits=" << r.fits;
}

void aggregate_peak(Outcome& o) {
  std::vector<inventory::DiskSpec> disks(4);
  for (auto& d : disks) d.nominal_write_bw = 3200000000ULL;
  const auto bw = bench::aggregate_peak_bw(disks);
  o.require(bw == 12800000000ULL, "aggregate " + std::to_string(bw));
  o.detail << bw << " B/s";
}

std::vector<std::string> with_role(const planner::DeploymentPlan& plan, planner::Role role) {
  std::vector<std::string> out;
  for (const auto& a : plan.assignments) {
    if (a.role == role) out.push_back(a.node + ":" + a.disk);
  }
  return out;
}

void plan_reproduction(Outcome& o) {
  using planner::Role;
  const auto dom = testsupport::make_plan(testsupport::dom_inventory(), 2, planner::DeploymentPolicy::dom());
  const auto meta = with_role(dom, Role::metadata);
  o.require(meta.size() == 2, "dom metadata disks: " + std::to_string(meta.size()));
  o.require(with_role(dom, Role::storage).size() == 4, "dom storage disks");
  o.require(!meta.empty() && meta.front().rfind(dom.allocation.nodes.front().id + ":", 0) == 0,
            "first metadata disk is not on the first node");
  o.require(!meta.empty() && with_role(dom, Role::management) == std::vector<std::string>{meta.front()},
            "management not on the first metadata disk");
  o.require(!meta.empty() && with_role(dom, Role::monitoring) == std::vector<std::string>{meta.front()},
            "monitoring not on the first metadata disk");

  const auto ault = testsupport::make_plan(testsupport::ault_inventory(), 1, planner::DeploymentPolicy::ault());
  const auto mgmt = with_role(ault, Role::management);
  const auto ameta = with_role(ault, Role::metadata);
  const auto astore = with_role(ault, Role::storage);
  o.require(mgmt.size() == 1 && ameta.size() == 2 && astore.size() == 5, "ault disks not 1+2+5");
  std::set<std::string> distinct(mgmt.begin(), mgmt.end());
  distinct.insert(ameta.begin(), ameta.end());
  distinct.insert(astore.begin(), astore.end());
  o.require(distinct.size() == 8, "ault roles share disks");

  for (int i = 0; i < 10; ++i) {
    o.require(testsupport::make_plan(testsupport::dom_inventory(), 2, planner::DeploymentPolicy::dom()) == dom,
              "dom plan differs on rerun " + std::to_string(i));
    o.require(testsupport::make_plan(testsupport::ault_inventory(), 1, planner::DeploymentPolicy::ault()) == ault,
              "ault plan differs on rerun " + std::to_string(i));
  }
  o.detail << "dom 2 meta/4 storage, mgmt+mon on " << (meta.empty() ? "?" : meta.front()) << "; ault "
           << mgmt.size() << "+" << ameta.size() << "+" << astore.size() << "; 10 reruns identical";
}

void striping(Outcome& o) {
  const auto t0 = Clock::now();
  std::size_t configs = 0, schedules = 0, balance = 0;
  for (std::size_t targets : {1, 2, 4, 8}) {
    for (std::uint64_t stripe : {64 * kKiB, kMiB}) {
      auto r = testsupport::run_striping_property(targets, stripe, 200, 4242 + targets * 31 + stripe, 16);
      const std::string cfg = "T=" + std::to_string(targets) + " stripe=" + std::to_string(stripe);
      o.require(r.schedules >= 200, cfg + ": only " + std::to_string(r.schedules) + " schedules");
      o.require(r.mismatches == 0, cfg + ": " + r.first_failure);
      o.require(r.balance_violations == 0, cfg + ": balance " + r.first_failure);
      ++configs;
      schedules += r.schedules;
      balance += r.balance_files;
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60, "took " + std::to_string(secs) + " s");
  o.detail << configs << " configurations, " << schedules << " schedules, " << balance << " balance files, " << secs
           << " s";
}

void hacc_layout(Outcome& o) {
  testsupport::TempDir dir("accept-hacc");
  bench::BenchSpec s;
  s.workload = bench::Workload::hacc;
  s.nodes = 3;
  s.ppn = 1;
  s.particles_per_proc = 5;
  s.iterations = 1;
  s.keep_files = true;
  bench::run_hacc(s, vfs::posix_factory(dir.path()));
  std::string expect;
  for (std::uint64_t rank = 0; rank < 3; ++rank) {
    for (std::uint64_t i = 0; i < 5; ++i) {
      const auto p = bench::make_particle(s.seed, rank, i);
      auto rec = testsupport::reference_particle_bytes(p.xx, p.yy, p.zz, p.vx, p.vy, p.vz, p.phi, p.pid, p.mask);
      o.require(rec.size() == 38, "reference record is not 38 bytes");
      expect.append(rec.begin(), rec.end());
    }
  }
  o.require(testsupport::read_file(dir.path() / "hacc.shared") == expect, "shared file differs from reference");
  o.require(bench::serialize_particles(s.seed, 0, 25000).size() == 950000, "25000-particle region size");

  testsupport::TempDir big("accept-hacc");
  s.particles_per_proc = 25000;
  s.nodes = 2;
  s.keep_files = false;
  auto r = bench::run_hacc(s, vfs::posix_factory(big.path()));
  o.require(r.file_size_bytes == 2 * 950000, "two 25000-particle regions gave " + std::to_string(r.file_size_bytes));

  // Every run reads back every byte: a single flipped byte anywhere fails it.
  auto corrupted_at = [&](const bench::BenchSpec& spec, const std::string& needle, std::uint64_t off) {
    testsupport::TempDir d("accept-verify");
    try {
      bench::run(spec, testsupport::corrupting_factory(vfs::posix_factory(d.path()), needle, off));
    } catch (const VerificationError& e) {
      return e.offset() == off;
    }
    return false;
  };
  s.particles_per_proc = 5;
  s.nodes = 3;
  for (std::uint64_t off : {0ULL, 189ULL, 190ULL, 569ULL}) {
    o.require(corrupted_at(s, "hacc", off), "hacc missed corruption at " + std::to_string(off));
  }
  bench::BenchSpec ior;
  ior.workload = bench::Workload::ior;
  ior.nodes = 2;
  ior.ppn = 2;
  ior.size_per_proc_bytes = 64 * kKiB;
  ior.transfer_size_bytes = 16 * kKiB;
  ior.iterations = 1;
  for (std::uint64_t off : {0ULL, 65535ULL, 65536ULL, 262143ULL}) {
    o.require(corrupted_at(ior, "ior", off), "ior shared missed corruption at " + std::to_string(off));
  }
  ior.mode = bench::Mode::file_per_process;
  o.require(corrupted_at(ior, "ior.fpp.3", 100), "ior fpp missed corruption");
  o.detail << "190-byte file matches reference; 950000 B per 25000-particle region; corruption detected";
}

void mdtest_accounting(Outcome& o) {
  std::size_t rows_checked = 0;
  for (auto [workers, items] : std::vector<std::pair<std::uint32_t, std::uint64_t>>{{1, 1}, {2, 10}, {4, 100}}) {
    testsupport::TempDir dir("accept-md");
    bench::BenchSpec s;
    s.workload = bench::Workload::mdtest;
    s.ppn = workers;
    s.items_per_proc = items;
    s.iterations = 1;
    auto r = bench::run_mdtest(s, vfs::posix_factory(dir.path()));
    const std::string cfg = "(" + std::to_string(workers) + "," + std::to_string(items) + ")";
    o.require(r.ops_table.size() == 9, cfg + ": " + std::to_string(r.ops_table.size()) + " rows");
    for (const auto& row : r.ops_table) {
      const std::uint64_t expect = row.target == bench::MdTarget::tree ? workers : workers * items;
      o.require(row.count == expect, cfg + " " + std::string(bench::to_string(row.target)) + " " + row.operation +
                                         " count " + std::to_string(row.count));
      o.require(std::llround(row.ops_per_sec * row.seconds) == static_cast<long long>(row.count),
                cfg + " " + row.operation + ": ops/s x seconds != count");
      ++rows_checked;
    }
  }
  o.detail << rows_checked << " rows checked";
}

void lifecycle(Outcome& o) {
  const auto t0 = Clock::now();
  testsupport::TempDir dir("accept-life");
  const auto inv = testsupport::local_inventory(2, 3);
  const auto plan = testsupport::make_plan(inv, 2, planner::DeploymentPolicy::dom());
  executor::NodeExecutor exec;
  exec.working_root = dir.path() / "root";
  exec.daemon_path = testsupport::daemon_path();
  auto h = executor::deploy(plan, exec);
  o.require(h.all_running(), "deploy failed: " + h.failure());
  if (!h.all_running()) return;
  std::vector<inventory::NodeSpec> compute;
  for (const auto& n : inventory::load_inventory(inv)) {
    if (n.kind == inventory::NodeKind::compute) compute.push_back(n);
  }
  executor::attach_clients(h, compute);
  auto client = ministore::Client::attach(h.client_mounts.begin()->second);
  std::vector<std::uint8_t> data(64 * kKiB);
  for (int i = 0; i < 100; ++i) {
    std::fill(data.begin(), data.end(), static_cast<std::uint8_t>(i));
    auto meta = client.create("/file." + std::to_string(i));
    client.write_at(meta, 0, data);
    client.fsync(meta);
  }
  auto report = executor::teardown(h);
  std::size_t left = 0;
  for (const auto& d : h.disk_directories()) {
    for (auto it = fs::recursive_directory_iterator(d); it != fs::recursive_directory_iterator(); ++it) ++left;
  }
  const auto daemons = executor::find_daemons(h.working_root);
  const double secs = seconds_since(t0);
  o.require(left == 0, std::to_string(left) + " entries left on disk directories");
  o.require(report.residual_entries() == 0, "teardown reported residual entries");
  o.require(daemons.empty(), std::to_string(daemons.size()) + " daemons still running");
  o.require(secs < 30, "took " + std::to_string(secs) + " s");
  o.detail << "deploy " << h.timing("deploy").value_or(0) << " s, " << report.bytes_scrubbed() << " B scrubbed from "
           << report.disks.size() << " disks, cycle " << secs << " s";
}

bool valid_results_csv(const fs::path& path, std::size_t expect_rows, std::string& why) {
  std::istringstream in(testsupport::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != bench::kResultsCsvHeader) {
    why = path.filename().string() + ": bad header";
    return false;
  }
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 10 || cells[0] != "ior" || (cells[6] != "write" && cells[6] != "read")) {
      why = path.filename().string() + ": bad row '" + line + "'";
      return false;
    }
    try {
      if (std::stoull(cells[7]) == 0 || std::stod(cells[8]) <= 0 || std::stod(cells[9]) <= 0) {
        why = path.filename().string() + ": non-positive value in '" + line + "'";
        return false;
      }
    } catch (const std::exception&) {
      why = path.filename().string() + ": non-numeric value in '" + line + "'";
      return false;
    }
  }
  if (rows != expect_rows) {
    why = path.filename().string() + ": " + std::to_string(rows) + " rows";
    return false;
  }
  return true;
}

void smoke(Outcome& o) {
  testsupport::TempDir dir("accept-cli");
  const auto inv = dir / "local.inv";
  const auto out = dir / "run";
  testsupport::write_file(inv, testsupport::local_inventory(2, 3));
  auto cli = [&](std::vector<std::string> args) {
    std::vector<std::string> argv = {testsupport::cli_path().string(), "--inventory", inv.string(), "--out",
                                     out.string()};
    argv.insert(argv.end(), args.begin(), args.end());
    std::string text;
    const int rc = testsupport::run_command(argv, &text);
    o.require(rc == 0, args.front() + " exited " + std::to_string(rc) + ": " + text);
    return rc == 0;
  };
  const bool ok = cli({"plan", "-N", "2"}) && cli({"deploy"}) &&
                  cli({"bench", "ior", "--mode", "shared", "--nodes", "2", "--ppn", "2", "--size", "1MiB",
                       "--transfer", "256KiB", "--iterations", "10"}) &&
                  cli({"bench", "ior", "--mode", "fpp", "--nodes", "2", "--ppn", "2", "--size", "1MiB",
                       "--transfer", "256KiB", "--iterations", "10"}) &&
                  cli({"report"});
  const bool down = cli({"teardown"});
  if (!ok || !down) return;
  std::string why;
  for (const char* name : {"ior-shared-ministore-1.csv", "ior-fpp-ministore-1.csv"}) {
    o.require(valid_results_csv(out / "bench" / name, 20, why), why);
  }
  std::istringstream report(testsupport::read_file(out / "report.csv"));
  std::string line;
  std::getline(report, line);
  const auto columns = std::count(line.begin(), line.end(), ',');
  std::size_t rows = 0;
  while (std::getline(report, line)) {
    ++rows;
    o.require(std::count(line.begin(), line.end(), ',') == columns, "report.csv row '" + line + "'");
  }
  o.require(rows > 0, "report.csv has no rows");
  o.require(executor::find_daemons(out / "root").empty(), "daemons left running");
  o.detail << "plan, deploy, 2 x 10 ior iterations, report, teardown exited 0; CSV valid";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"cache-fit formula", cache_fit},
      {"aggregate peak bandwidth", aggregate_peak},
      {"plan reproduction", plan_reproduction},
      {"striping oracle", striping},
      {"hacc layout and read-back verification", hacc_layout},
      {"mdtest accounting", mdtest_accounting},
      {"lifecycle", lifecycle},
      {"end-to-end smoke", smoke},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail.str("");
      o.detail << "threw: " << e.what();
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << ": " << criteria[i].first << " ("
              << o.detail.str() << ")" << std::endl;
  }
  return failed ? 1 : 0;
}
