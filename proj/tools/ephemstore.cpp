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

// Operator entry point: plan, deploy, status, attach, stage, bench, report,
// teardown. Exit codes: 0 ok, 2 usage, 3 missing state, 4 runtime failure.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ephemstore/bench.hpp"
#include "ephemstore/error.hpp"
#include "ephemstore/executor.hpp"
#include "ephemstore/fs.hpp"
#include "ephemstore/inventory.hpp"
#include "ephemstore/manifest.hpp"
#include "ephemstore/planner.hpp"
#include "ephemstore/units.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ephemstore;

constexpr int kExitUsage = 2;
constexpr int kExitState = 3;
constexpr int kExitRuntime = 4;

struct Globals {
  std::string inventory;
  std::string out = "ephemstore-run";
  std::string backend = "local";
};

struct PolicyFlags {
  std::string preset = "dom";
  std::optional<std::uint32_t> meta_disks, storage_disks, mgmt_disks, stripe_count, base_port;
  std::string stripe_size;
  bool xattr = false;
};

planner::DeploymentPolicy make_policy(const PolicyFlags& f) {
  planner::DeploymentPolicy p;
  if (f.preset == "dom") p = planner::DeploymentPolicy::dom();
  else if (f.preset == "ault") p = planner::DeploymentPolicy::ault();
  else throw UsageError("unknown policy '" + f.preset + "' (expected dom or ault)");
  if (f.meta_disks) p.meta_disks_per_node = *f.meta_disks;
  if (f.storage_disks) p.storage_disks_per_node = *f.storage_disks;
  if (f.mgmt_disks) {
    p.dedicated_mgmt_disks = *f.mgmt_disks;
    p.colocate_mgmt_on_first_meta = *f.mgmt_disks == 0;
  }
  if (!f.stripe_size.empty()) p.stripe_size_bytes = parse_size(f.stripe_size);
  if (f.stripe_count) p.stripe_count = *f.stripe_count;
  if (f.base_port) p.base_port = *f.base_port;
  if (f.xattr) p.enable_xattr_metadata = true;
  p.validate();
  return p;
}

planner::DeploymentPlan replan(const cli::RunManifest& m) {
  inventory::AllocationRegistry reg(inventory::load_inventory_file(m.inventory));
  auto alloc = reg.request({m.storage_nodes, m.constraint, inventory::Purpose::storage});
  return planner::plan_deployment(alloc, m.policy);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out.flush()) throw Error("cannot write " + path.string());
}

executor::DeploymentHandle load_handle(const cli::RunManifest& m) {
  if (m.working_root.empty()) throw StateError("nothing deployed from " + m.out_dir.string());
  return executor::DeploymentHandle::load(m.working_root, replan(m));
}

int cmd_plan(const Globals& g, std::uint32_t storage_nodes, const std::string& constraint, const PolicyFlags& pf) {
  if (g.inventory.empty()) throw UsageError("plan needs --inventory");
  if (storage_nodes == 0) throw UsageError("--storage-nodes must be at least 1");
  const fs::path out(g.out);
  cli::RunLock lock(out);
  cli::RunManifest m;
  if (cli::RunManifest::exists(out)) {
    m = cli::RunManifest::load(out);
    if (!m.working_root.empty() && fs::exists(m.working_root / executor::kStateFileName)) {
      throw StateError("a deployment is live from " + out.string() + "; tear it down before planning again");
    }
  }
  m.out_dir = out;
  m.inventory = fs::absolute(g.inventory);
  m.storage_nodes = storage_nodes;
  m.constraint = constraint;
  m.policy_name = pf.preset;
  m.policy = make_policy(pf);
  m.backend = g.backend;
  m.working_root.clear();

  inventory::AllocationRegistry reg(inventory::load_inventory_file(m.inventory));
  auto alloc = reg.request({storage_nodes, constraint, inventory::Purpose::storage});
  auto plan = planner::plan_deployment(alloc, m.policy);
  m.allocation_ids = {alloc.id};

  std::cout << planner::format_role_table(plan);
  std::ostringstream roles;
  roles << "node,disk,role,mount_root\n";
  for (const auto& a : plan.assignments) {
    roles << a.node << "," << a.disk << "," << planner::to_string(a.role) << "," << a.mount_root.string() << "\n";
  }
  write_text(out / "plan" / "roles.csv", roles.str());
  for (const auto& doc : planner::render_configs(plan)) write_text(out / "plan" / doc.path, doc.content);
  write_text(out / "plan" / "plan.txt", planner::format_plan(plan));
  m.save();
  std::cout << "configs written to " << (out / "plan").string() << "\n";
  return 0;
}

int cmd_deploy(const Globals& g, const std::string& root) {
  const fs::path out(g.out);
  cli::RunLock lock(out);
  auto m = cli::RunManifest::load(out);
  auto plan = replan(m);
  executor::NodeExecutor exec;
  exec.backend = executor::backend_from_string(g.backend);
  exec.working_root = root.empty() ? fs::absolute(out / "root") : fs::path(root);
  auto h = executor::deploy(plan, exec);

  std::ostringstream csv;
  csv << "phase,seconds\n";
  for (const auto& [phase, secs] : h.timings) csv << phase << "," << secs << "\n";
  write_text(out / "deploy.csv", csv.str());
  if (h.failed()) {
    std::cerr << "deploy failed: " << h.failure() << "\n";
    return kExitRuntime;
  }
  m.backend = std::string(executor::to_string(exec.backend));
  m.working_root = h.working_root;
  m.save();
  if (exec.backend == executor::Backend::external_emit) {
    std::cout << "launch manifest written to " << (h.working_root / executor::kLaunchManifestName).string() << "\n";
    return 0;
  }
  for (const auto& s : h.services) std::cout << s.id << " running\n";
  std::cout << "deployment time: " << std::fixed << std::setprecision(3) << *h.timing("deploy") << " s\n";
  return 0;
}

int cmd_status(const Globals& g) {
  const fs::path out(g.out);
  auto m = cli::RunManifest::load(out);
  auto h = load_handle(m);
  std::ostringstream csv;
  csv << "service,state\n";
  int rc = 0;
  for (const auto& s : h.services) {
    std::string state(executor::to_string(s.state));
    if (s.state == executor::ServiceState::running && !net::is_live(s.endpoint)) {
      state = "failed";
      rc = kExitRuntime;
    }
    std::cout << std::left << std::setw(40) << s.id << state << "\n";
    csv << s.id << "," << state << "\n";
  }
  for (const auto& [node, point] : h.client_mounts) std::cout << "client " << node << " at " << point.string() << "\n";
  write_text(out / "status.csv", csv.str());
  return rc;
}

int cmd_attach(const Globals& g, std::optional<std::uint32_t> count) {
  const fs::path out(g.out);
  cli::RunLock lock(out);
  auto m = cli::RunManifest::load(out);
  auto h = load_handle(m);
  inventory::AllocationRegistry reg(inventory::load_inventory_file(m.inventory));
  std::size_t eligible = 0;
  for (const auto& n : reg.inventory()) eligible += inventory::eligible_for(n, inventory::Purpose::compute);
  const std::size_t want = count ? *count : eligible;
  std::vector<inventory::NodeSpec> nodes;
  if (want > 0) {
    auto alloc = reg.request({want, "", inventory::Purpose::compute});
    nodes = alloc.nodes;
    m.allocation_ids.push_back(alloc.id);
  }
  executor::attach_clients(h, nodes);
  std::ostringstream csv;
  csv << "node,attach_point\n";
  for (const auto& [node, point] : h.client_mounts) {
    std::cout << node << " -> " << point.string() << "\n";
    csv << node << "," << point.string() << "\n";
  }
  write_text(out / "attach.csv", csv.str());
  m.save();
  return 0;
}

int cmd_stage(const Globals& g, const std::string& direction, const std::string& src, const std::string& dst) {
  const fs::path out(g.out);
  cli::RunLock lock(out);
  auto m = cli::RunManifest::load(out);
  auto h = load_handle(m);
  executor::StageDirection dir;
  if (direction == "in") dir = executor::StageDirection::in;
  else if (direction == "out") dir = executor::StageDirection::out;
  else throw UsageError("stage direction must be 'in' or 'out'");
  const auto bytes = executor::stage(h, dir, src, dst);
  std::cout << "staged " << bytes << " bytes " << direction << ": " << src << " -> " << dst << "\n";
  const fs::path csv = out / "stage.csv";
  const bool fresh = !fs::exists(csv);
  std::ofstream f(csv, std::ios::app);
  if (fresh) f << "direction,src,dst,bytes\n";
  f << direction << "," << src << "," << dst << "," << bytes << "\n";
  return 0;
}

struct BenchFlags {
  std::string workload;
  std::string mode = "shared";
  std::string size = "4MiB";
  std::string transfer = "1MiB";
  std::uint32_t nodes = 1;
  std::uint32_t ppn = 1;
  std::uint64_t particles = 25000;
  std::uint64_t items = 1000;
  std::string file_bytes = "0";
  std::uint32_t iterations = 10;
  std::uint64_t seed = 0x5eed;
  bool no_reorder = false;
  bool no_fsync = false;
  bool keep = false;
  std::string baseline;
  std::string dir = "/";
};

int cmd_bench(const Globals& g, const BenchFlags& f) {
  const fs::path out(g.out);
  cli::RunLock lock(out);
  bench::BenchSpec spec;
  spec.workload = bench::workload_from_string(f.workload);
  spec.mode = bench::mode_from_string(f.mode);
  spec.ppn = f.ppn;
  spec.size_per_proc_bytes = parse_size(f.size);
  spec.transfer_size_bytes = parse_size(f.transfer);
  spec.particles_per_proc = f.particles;
  spec.items_per_proc = f.items;
  spec.mdtest_file_bytes = parse_size(f.file_bytes);
  spec.iterations = f.iterations;
  spec.seed = f.seed;
  spec.reorder_read_ranks = !f.no_reorder;
  spec.fsync = !f.no_fsync;
  spec.keep_files = f.keep;
  spec.directory = f.dir;

  vfs::FileSystemFactory attach;
  std::optional<cli::RunManifest> manifest;
  std::string target;
  if (!f.baseline.empty()) {
    if (!fs::is_directory(f.baseline)) throw UsageError("baseline directory " + f.baseline + " does not exist");
    attach = vfs::posix_factory(f.baseline);
    spec.nodes = f.nodes;
    target = "baseline";
  } else {
    manifest = cli::RunManifest::load(out);
    auto h = load_handle(*manifest);
    if (!h.all_running()) throw StateError("deployment in " + h.working_root.string() + " is not running");
    auto conf = h.plan.client_template();
    conf.options.emplace_back("realm", h.realm);
    attach = vfs::client_factory(conf, h.realm);
    spec.nodes = f.nodes;
    target = "ministore";
  }
  spec.validate();

  auto result = bench::run(spec, attach);
  bench::write_summary(std::cout, result);

  std::string name = std::string(bench::to_string(spec.workload));
  if (spec.workload != bench::Workload::mdtest) name += "-" + std::string(bench::to_string(spec.mode));
  name += "-" + target;
  fs::create_directories(out / "bench");
  std::size_t seq = 1;
  while (fs::exists(out / "bench" / (name + "-" + std::to_string(seq) + ".csv"))) ++seq;
  const fs::path csv = out / "bench" / (name + "-" + std::to_string(seq) + ".csv");
  std::ostringstream body;
  if (spec.workload == bench::Workload::mdtest) bench::write_mdtest_csv(body, result);
  else bench::write_results_csv(body, result);
  write_text(csv, body.str());
  std::cout << "results: " << csv.string() << "\n";
  if (manifest) {
    manifest->bench_runs.push_back(csv.filename().string());
    manifest->save();
  }
  return 0;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int cmd_report(const Globals& g) {
  const fs::path dir = fs::path(g.out) / "bench";
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".csv") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw StateError("no benchmark results under " + dir.string());

  std::ostringstream bw_csv, md_csv;
  bw_csv << "run,workload,mode,nodes,ppn,phase,iterations,min_bw,median_bw,max_bw\n";
  md_csv << "run,target,operation,iterations,min_ops,median_ops,max_ops\n";
  const auto bw_cols = split_csv(bench::kResultsCsvHeader).size();
  const auto md_cols = split_csv(bench::kMdtestCsvHeader).size();

  for (const auto& file : files) {
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    const bool is_md = header == bench::kMdtestCsvHeader;
    if (!is_md && header != bench::kResultsCsvHeader) throw Error(file.string() + ": unrecognised CSV header");
    const std::string run = file.stem().string();
    std::cout << run << "\n";
    // key -> values, in first-seen order
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    std::map<std::string, std::vector<std::string>> prefix;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      auto c = split_csv(line);
      if (c.size() != (is_md ? md_cols : bw_cols)) {
        throw Error(file.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(is_md ? md_cols : bw_cols) + " columns");
      }
      std::string key = is_md ? c[2] + "," + c[3] : c[6];
      auto it = std::find_if(groups.begin(), groups.end(), [&](auto& p) { return p.first == key; });
      if (it == groups.end()) {
        groups.emplace_back(key, std::vector<double>{});
        it = std::prev(groups.end());
        prefix[key] = c;
      }
      it->second.push_back(std::stod(is_md ? c[6] : c[9]));
    }
    for (const auto& [key, values] : groups) {
      const auto s = bench::summarize(values);
      const auto& c = prefix[key];
      if (is_md) {
        md_csv << run << "," << key << "," << values.size() << "," << s.min << "," << s.median << "," << s.max << "\n";
        std::cout << "  " << std::left << std::setw(12) << c[2] << std::setw(10) << c[3] << std::right << std::fixed
                  << std::setprecision(2) << std::setw(14) << s.median << " ops/s (median of " << values.size()
                  << ")\n";
      } else {
        bw_csv << run << "," << c[0] << "," << c[1] << "," << c[2] << "," << c[3] << "," << key << ","
               << values.size() << "," << s.min << "," << s.median << "," << s.max << "\n";
        std::cout << "  " << std::left << std::setw(6) << key << std::right << std::fixed << std::setprecision(2)
                  << " min " << std::setw(10) << s.min / kMiB << "  median " << std::setw(10) << s.median / kMiB
                  << "  max " << std::setw(10) << s.max / kMiB << " MiB/s over " << values.size()
                  << " iteration(s)\n";
      }
      std::cout.unsetf(std::ios::fixed);
    }
  }
  write_text(fs::path(g.out) / "report.csv", bw_csv.str());
  write_text(fs::path(g.out) / "report_mdtest.csv", md_csv.str());
  return 0;
}

int cmd_teardown(const Globals& g) {
  const fs::path out(g.out);
  cli::RunLock lock(out);
  auto m = cli::RunManifest::load(out);
  auto h = load_handle(m);
  auto report = executor::teardown(h);
  std::ostringstream csv;
  report.write_csv(csv);
  write_text(out / "teardown.csv", csv.str());
  for (const auto& s : report.stopped) std::cout << "stopped " << s << "\n";
  for (const auto& d : report.disks) {
    std::cout << "scrubbed " << d.disk.string() << ": " << d.bytes_scrubbed << " bytes, " << d.residual_entries
              << " residual entries\n";
  }
  for (const auto& r : report.residuals) std::cout << "residual: " << r << "\n";
  std::cout << "removed " << report.mounts_removed << " client attach point(s)\n";
  m.working_root.clear();
  m.save();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ephemstore: on-demand storage provisioning for compute allocations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--inventory", g.inventory, "inventory file");
  app.add_option("--out", g.out, "run directory holding the manifest and CSV outputs")->capture_default_str();
  app.add_option("--backend", g.backend, "executor backend")->capture_default_str()->check(CLI::IsMember({"local", "emit"}));

  std::uint32_t storage_nodes = 0;
  std::string constraint;
  PolicyFlags pf;
  auto* plan = app.add_subcommand("plan", "allocate storage nodes and render service configs");
  plan->add_option("--storage-nodes,-N", storage_nodes, "storage nodes to allocate")->required();
  plan->add_option("--constraint", constraint, "feature constraint, e.g. 'nvme&storage'");
  plan->add_option("--policy", pf.preset, "dom or ault")->capture_default_str();
  plan->add_option("--meta-disks", pf.meta_disks, "metadata disks per node");
  plan->add_option("--storage-disks", pf.storage_disks, "storage disks per node");
  plan->add_option("--mgmt-disks", pf.mgmt_disks, "dedicated management disks on the first node");
  plan->add_option("--stripe-size", pf.stripe_size, "chunk size, e.g. 1MiB");
  plan->add_option("--stripe-count", pf.stripe_count, "targets per file (0: all)");
  plan->add_option("--base-port", pf.base_port, "first service port");
  plan->add_flag("--xattr", pf.xattr, "keep inode records in extended attributes");

  std::string root;
  auto* deploy = app.add_subcommand("deploy", "launch the planned services");
  deploy->add_option("--root", root, "working root (default <out>/root; EPHEMSTORE_ROOT overrides)");

  auto* status = app.add_subcommand("status", "print service states");

  std::optional<std::uint32_t> attach_count;
  auto* attach = app.add_subcommand("attach", "attach clients on compute nodes");
  attach->add_option("--nodes", attach_count, "compute nodes to attach (default: all eligible)");

  std::string direction, src, dst;
  auto* stage = app.add_subcommand("stage", "copy data into or out of the deployed namespace");
  stage->add_option("direction", direction, "in or out")->required()->check(CLI::IsMember({"in", "out"}));
  stage->add_option("src", src, "source path")->required();
  stage->add_option("dst", dst, "destination path")->required();

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "run ior, mdtest or hacc");
  bench->add_option("workload", bf.workload, "ior, mdtest or hacc")
      ->required()
      ->check(CLI::IsMember({"ior", "mdtest", "hacc"}));
  bench->add_option("--mode", bf.mode, "shared or fpp")->capture_default_str()->check(CLI::IsMember({"shared", "fpp"}));
  bench->add_option("--size", bf.size, "ior bytes per process")->capture_default_str();
  bench->add_option("--transfer", bf.transfer, "transfer size")->capture_default_str();
  bench->add_option("--nodes", bf.nodes, "client nodes")->capture_default_str();
  bench->add_option("--ppn", bf.ppn, "processes per node")->capture_default_str();
  bench->add_option("--particles", bf.particles, "hacc particles per process")->capture_default_str();
  bench->add_option("--items", bf.items, "mdtest items per process")->capture_default_str();
  bench->add_option("--file-bytes", bf.file_bytes, "mdtest bytes written per file")->capture_default_str();
  bench->add_option("--iterations", bf.iterations, "iterations")->capture_default_str();
  bench->add_option("--seed", bf.seed, "data pattern seed")->capture_default_str();
  bench->add_flag("--no-reorder", bf.no_reorder, "read back one's own data");
  bench->add_flag("--no-fsync", bf.no_fsync, "skip fsync before close");
  bench->add_flag("--keep", bf.keep, "keep the last iteration's files");
  bench->add_option("--baseline", bf.baseline, "run against this plain directory instead");
  bench->add_option("--dir", bf.dir, "namespace directory for the run")->capture_default_str();

  auto* report = app.add_subcommand("report", "summarise benchmark results");
  auto* teardown = app.add_subcommand("teardown", "stop services and scrub disks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(g, storage_nodes, constraint, pf);
    if (*deploy) return cmd_deploy(g, root);
    if (*status) return cmd_status(g);
    if (*attach) return cmd_attach(g, attach_count);
    if (*stage) return cmd_stage(g, direction, src, dst);
    if (*bench) return cmd_bench(g, bf);
    if (*report) return cmd_report(g);
    if (*teardown) return cmd_teardown(g);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitState;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
