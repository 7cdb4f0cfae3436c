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

#include "ephemstore/executor.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "ephemstore/client.hpp"
#include "ephemstore/cluster.hpp"
#include "ephemstore/error.hpp"
#include "ephemstore/registry.hpp"
#include "ephemstore/services.hpp"
#include "ephemstore/units.hpp"

extern char** environ;

namespace ephemstore::executor {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using planner::ServiceKind;

namespace {

constexpr const char* kDaemonName = "ephemstore-daemon";
constexpr std::chrono::milliseconds kPoll{20};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::vector<std::string> read_cmdline(pid_t pid) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/cmdline", std::ios::binary);
  std::vector<std::string> args;
  std::string arg;
  while (std::getline(in, arg, '\0')) args.push_back(arg);
  return args;
}

char proc_state(pid_t pid) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/stat");
  std::string line;
  if (!std::getline(in, line)) return 0;
  auto paren = line.rfind(')');
  if (paren == std::string::npos || paren + 2 >= line.size()) return 0;
  return line[paren + 2];
}

// True while `pid` is a live (non-zombie) process. Reaps our own children.
bool alive(pid_t pid) {
  if (pid <= 0) return false;
  int status = 0;
  pid_t r = ::waitpid(pid, &status, WNOHANG);
  if (r == pid) return false;
  if (r == 0) return true;
  if (::kill(pid, 0) != 0) return false;
  char st = proc_state(pid);
  return st != 0 && st != 'Z' && st != 'X';
}

bool wait_exit(pid_t pid, std::chrono::milliseconds limit) {
  auto deadline = Clock::now() + limit;
  while (alive(pid)) {
    if (Clock::now() >= deadline) return false;
    std::this_thread::sleep_for(kPoll);
  }
  return true;
}

// Guards against signalling a recycled pid.
bool owns(const ServiceRecord& rec) {
  auto args = read_cmdline(rec.pid);
  return std::find(args.begin(), args.end(), rec.config_path.string()) != args.end();
}

bool ping(const net::Endpoint& ep) {
  try {
    net::Connection conn(ep, std::chrono::milliseconds(500));
    return conn.call(wire::Opcode::ping).ok();
  } catch (const Error&) {
    return false;
  }
}

std::string log_tail(const fs::path& log) {
  std::ifstream in(log);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) last = line;
  }
  return last.empty() ? "exited during startup" : last;
}

fs::path log_path(const fs::path& root, const ServiceRecord& rec) {
  return root / "logs" / (rec.config_path.stem().string() + ".log");
}

pid_t spawn_daemon(const fs::path& daemon, const ServiceRecord& rec, const DeploymentHandle& h) {
  const fs::path log = log_path(h.working_root, rec);
  std::vector<std::string> args = {daemon.string(), "--config", rec.config_path.string(),
                                   "--data-dir", rec.data_dir.string(), "--working-root",
                                   h.working_root.string(), "--realm", h.realm};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawnattr_t attr;
  posix_spawn_file_actions_init(&actions);
  posix_spawnattr_init(&attr);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSID);
  pid_t pid = 0;
  int rc = ::posix_spawn(&pid, daemon.c_str(), &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw ServiceFailed(rec.id, "cannot launch " + daemon.string() + ": " + std::strerror(rc));
  return pid;
}

// Shutdown frame, then SIGTERM, then SIGKILL. Appends to `residuals` when
// the service had to be forced.
bool stop_process(ServiceRecord& rec, std::vector<std::string>& residuals) {
  if (!alive(rec.pid) || !owns(rec)) return false;
  bool answered = false;
  try {
    net::Connection conn(rec.endpoint, std::chrono::milliseconds(1000));
    answered = conn.call(wire::Opcode::shutdown).ok();
  } catch (const Error&) {
  }
  if (answered && wait_exit(rec.pid, std::chrono::milliseconds(5000))) return true;
  ::kill(rec.pid, SIGTERM);
  if (wait_exit(rec.pid, std::chrono::milliseconds(1000))) {
    residuals.push_back(rec.id + ": ignored shutdown request, stopped by SIGTERM");
    return true;
  }
  ::kill(rec.pid, SIGKILL);
  if (wait_exit(rec.pid, std::chrono::milliseconds(3000))) {
    residuals.push_back(rec.id + ": unresponsive, killed");
  } else {
    residuals.push_back(rec.id + ": unresponsive, pid " + std::to_string(rec.pid) + " survived SIGKILL");
  }
  return true;
}

void stop_services(DeploymentHandle& h, std::vector<std::string>& stopped, std::vector<std::string>& residuals) {
  for (auto it = h.services.rbegin(); it != h.services.rend(); ++it) {
    auto& rec = *it;
    if (rec.state == ServiceState::stopped) continue;
    if (rec.pid > 0 && stop_process(rec, residuals)) stopped.push_back(rec.id);
    if (rec.state != ServiceState::failed) rec.state = ServiceState::stopped;
  }
}

DiskScrub scrub(const fs::path& disk, std::vector<std::string>& residuals) {
  DiskScrub out;
  out.disk = disk;
  std::error_code ec;
  if (!fs::exists(disk, ec)) return out;
  for (auto it = fs::recursive_directory_iterator(disk, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    ++out.entries_removed;
    if (it->is_regular_file(ec)) out.bytes_scrubbed += it->file_size(ec);
  }
  for (const auto& entry : fs::directory_iterator(disk, ec)) {
    std::error_code rm;
    fs::remove_all(entry.path(), rm);
    if (rm) residuals.push_back(entry.path().string() + ": " + rm.message());
  }
  for (auto it = fs::recursive_directory_iterator(disk, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    ++out.residual_entries;
  }
  out.entries_removed -= std::min(out.entries_removed, out.residual_entries);
  if (out.residual_entries > 0) {
    residuals.push_back(disk.string() + ": " + std::to_string(out.residual_entries) + " entries left");
  }
  return out;
}

fs::path prepare_root(const fs::path& requested) {
  if (requested.empty()) throw UsageError("no working root given");
  std::error_code ec;
  fs::create_directories(requested, ec);
  if (ec || !fs::is_directory(requested)) {
    throw Error("working root " + requested.string() + " is unusable: " +
                     (ec ? ec.message() : std::string("not a directory")));
  }
  if (::access(requested.c_str(), W_OK | X_OK) != 0) {
    throw Error("working root " + requested.string() + " is not writable");
  }
  return fs::canonical(requested);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
  if (!out.flush()) throw Error("cannot write " + path.string());
}

std::string beegfs_name(ServiceKind kind) {
  switch (kind) {
    case ServiceKind::management: return "beegfs-mgmtd";
    case ServiceKind::metadata: return "beegfs-meta";
    case ServiceKind::storage: return "beegfs-storage";
    case ServiceKind::monitoring: return "beegfs-mon";
    case ServiceKind::client: return "beegfs-client";
  }
  return "?";
}

std::string mapping_table(const planner::DeploymentPlan& plan) {
  std::ostringstream out;
  out << "# ephemstore service -> BeeGFS daemon\n";
  for (const auto& s : plan.services) {
    out << s.id << "\t" << beegfs_name(s.service) << "\n";
  }
  out << "\n# ephemstore key -> BeeGFS key\n"
      << "mgmt_address\tsysMgmtdHost\n"
      << "mgmt_port\tconnMgmtdPortTCP\n"
      << "listen_port\tconnMetaPortTCP / connStoragePortTCP\n"
      << "data_dir (metadata)\tstoreMetaDirectory\n"
      << "data_dir (storage)\tstoreStorageDirectory\n"
      << "data_dir (management)\tstoreMgmtdDirectory\n"
      << "use_xattr\tstoreUseExtendedAttribs\n"
      << "stripe_size\tbeegfs-ctl --setpattern --chunksize\n"
      << "stripe_count\tbeegfs-ctl --setpattern --numtargets\n";
  return out.str();
}

void emit(DeploymentHandle& h) {
  auto t0 = Clock::now();
  const auto docs = planner::render_configs(h.plan);
  std::ofstream manifest(h.working_root / kLaunchManifestName, std::ios::trunc);
  const auto tiers = h.plan.tiers();
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    for (const auto* conf : tiers[t]) {
      auto idx = static_cast<std::size_t>(conf - h.plan.services.data());
      const fs::path path = h.working_root / "configs" / docs[idx].path;
      manifest << "tier " << t + 1 << ": " << (conf->node.empty() ? "*" : conf->node) << " "
               << planner::to_string(conf->service) << " " << path.string() << "\n";
    }
  }
  if (!manifest.flush()) throw Error("cannot write launch manifest under " + h.working_root.string());
  write_file(h.working_root / "mapping.txt", mapping_table(h.plan));
  h.timings.emplace_back("emit", seconds_since(t0));
}

bool tier_healthy(DeploymentHandle& h, std::vector<ServiceRecord*>& tier, const net::Endpoint& mgmt) {
  bool need_registry = false;
  for (auto* rec : tier) {
    if (rec->state != ServiceState::pending) continue;
    if (!alive(rec->pid)) {
      rec->state = ServiceState::failed;
      rec->error = one_line(log_tail(log_path(h.working_root, *rec)));
      return false;
    }
    if (rec->kind == ServiceKind::management) {
      if (ping(rec->endpoint)) rec->state = ServiceState::running;
    } else {
      need_registry = true;
    }
  }
  if (need_registry) {
    std::set<std::string> registered;
    try {
      for (const auto& e : ministore::query_registry(mgmt).entries) registered.insert(e.id);
    } catch (const Error&) {
    }
    for (auto* rec : tier) {
      if (rec->state == ServiceState::pending && registered.count(rec->registry_id) && ping(rec->endpoint)) {
        rec->state = ServiceState::running;
      }
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(Backend backend) {
  return backend == Backend::local_process ? "local" : "emit";
}

Backend backend_from_string(std::string_view text) {
  if (text == "local" || text == "local_process") return Backend::local_process;
  if (text == "emit" || text == "external_emit") return Backend::external_emit;
  throw UsageError("unknown backend '" + std::string(text) + "' (expected local or emit)");
}

std::string_view to_string(ServiceState state) {
  switch (state) {
    case ServiceState::pending: return "pending";
    case ServiceState::running: return "running";
    case ServiceState::failed: return "failed";
    case ServiceState::stopped: return "stopped";
  }
  return "?";
}

ServiceState service_state_from_string(std::string_view text) {
  for (auto s : {ServiceState::pending, ServiceState::running, ServiceState::failed, ServiceState::stopped}) {
    if (to_string(s) == text) return s;
  }
  throw ParseError(0, "unknown service state '" + std::string(text) + "'");
}

fs::path NodeExecutor::root() const {
  if (const char* env = std::getenv("EPHEMSTORE_ROOT"); env && *env) return env;
  return working_root;
}

fs::path NodeExecutor::daemon() const {
  if (!daemon_path.empty()) return daemon_path;
  if (const char* env = std::getenv("EPHEMSTORE_DAEMON"); env && *env) return env;
  std::error_code ec;
  auto self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    auto sibling = self.parent_path() / kDaemonName;
    if (fs::exists(sibling, ec)) return sibling;
  }
#ifdef EPHEMSTORE_DAEMON_PATH
  return EPHEMSTORE_DAEMON_PATH;
#else
  return kDaemonName;
#endif
}

std::map<std::string, ServiceState> DeploymentHandle::service_states() const {
  std::map<std::string, ServiceState> out;
  for (const auto& s : services) out[s.id] = s.state;
  return out;
}

const ServiceRecord* DeploymentHandle::find(const std::string& id) const {
  for (const auto& s : services) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

bool DeploymentHandle::all_running() const {
  return !services.empty() &&
         std::all_of(services.begin(), services.end(), [](const auto& s) { return s.state == ServiceState::running; });
}

bool DeploymentHandle::failed() const {
  return std::any_of(services.begin(), services.end(), [](const auto& s) { return s.state == ServiceState::failed; });
}

std::string DeploymentHandle::failure() const {
  for (const auto& s : services) {
    if (s.state == ServiceState::failed) return s.id + ": " + s.error;
  }
  return {};
}

std::optional<double> DeploymentHandle::timing(const std::string& phase) const {
  for (const auto& [name, secs] : timings) {
    if (name == phase) return secs;
  }
  return std::nullopt;
}

std::vector<fs::path> DeploymentHandle::disk_directories() const {
  std::vector<fs::path> out;
  for (const auto& s : services) {
    if (std::find(out.begin(), out.end(), s.data_dir) == out.end()) out.push_back(s.data_dir);
  }
  return out;
}

void DeploymentHandle::save() const {
  std::ostringstream out;
  out << "backend\t" << to_string(backend) << "\n";
  out << "realm\t" << realm << "\n";
  for (const auto& s : services) {
    out << "service\t" << s.id << "\t" << planner::to_string(s.kind) << "\t" << s.node << "\t" << s.disk << "\t"
        << s.registry_id << "\t" << to_string(s.state) << "\t" << s.pid << "\t" << s.endpoint.address << "\t"
        << s.endpoint.port << "\t" << s.data_dir.string() << "\t" << s.config_path.string() << "\t"
        << one_line(s.error) << "\n";
  }
  for (const auto& [node, path] : client_mounts) out << "mount\t" << node << "\t" << path.string() << "\n";
  for (const auto& [phase, secs] : timings) out << "timing\t" << phase << "\t" << secs << "\n";
  const fs::path tmp = state_path().string() + ".tmp";
  write_file(tmp, out.str());
  fs::rename(tmp, state_path());
}

DeploymentHandle DeploymentHandle::load(const fs::path& working_root, planner::DeploymentPlan plan) {
  DeploymentHandle h;
  h.plan = std::move(plan);
  h.working_root = working_root;
  std::ifstream in(h.state_path());
  if (!in) throw StateError("no deployment under " + working_root.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_tabs(line);
    try {
      if (f[0] == "backend" && f.size() == 2) {
        h.backend = backend_from_string(f[1]);
      } else if (f[0] == "realm" && f.size() == 2) {
        h.realm = f[1];
      } else if (f[0] == "service" && f.size() == 13) {
        ServiceRecord r;
        r.id = f[1];
        r.kind = planner::service_kind_from_string(f[2]);
        r.node = f[3];
        r.disk = f[4];
        r.registry_id = f[5];
        r.state = service_state_from_string(f[6]);
        r.pid = static_cast<pid_t>(parse_uint(f[7]));
        r.endpoint = net::Endpoint{h.realm, f[8], static_cast<std::uint32_t>(parse_uint(f[9]))};
        r.data_dir = f[10];
        r.config_path = f[11];
        r.error = f[12];
        h.services.push_back(std::move(r));
      } else if (f[0] == "mount" && f.size() == 3) {
        h.client_mounts[f[1]] = f[2];
      } else if (f[0] == "timing" && f.size() == 3) {
        h.timings.emplace_back(f[1], std::stod(f[2]));
      } else {
        throw ParseError(lineno, "unrecognised record");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(lineno, std::string("bad state record: ") + e.what());
    }
  }
  return h;
}

DeploymentHandle deploy(const planner::DeploymentPlan& plan, const NodeExecutor& exec) {
  DeploymentHandle h;
  h.plan = plan;
  h.backend = exec.backend;
  h.working_root = prepare_root(exec.root());
  h.realm = net::realm_for(h.working_root);

  fs::create_directories(h.working_root / "configs");
  fs::create_directories(h.working_root / "logs");
  const auto docs = planner::render_configs(plan);
  for (std::size_t i = 0; i < plan.services.size(); ++i) {
    const auto& conf = plan.services[i];
    const fs::path path = h.working_root / "configs" / docs[i].path;
    write_file(path, docs[i].content);
    if (conf.service == ServiceKind::client) continue;
    ServiceRecord rec;
    rec.id = conf.id;
    rec.kind = conf.service;
    rec.node = conf.node;
    rec.disk = conf.disk;
    rec.registry_id = conf.service == ServiceKind::storage ? conf.option("target_id", conf.id) : conf.id;
    rec.endpoint = ministore::service_endpoint(conf, h.realm);
    rec.data_dir = ministore::disk_directory(h.working_root, conf.node, conf.disk);
    rec.config_path = path;
    h.services.push_back(std::move(rec));
  }

  if (exec.backend == Backend::external_emit) {
    emit(h);
    h.save();
    return h;
  }

  for (const auto& rec : h.services) {
    if (net::is_live(rec.endpoint)) {
      throw PortCollision(rec.id + ": endpoint " + rec.endpoint.to_string() + " is already in use under " +
                          h.working_root.string());
    }
  }

  const fs::path daemon = exec.daemon();
  const net::Endpoint mgmt = ministore::management_endpoint(plan.management(), h.realm);
  const auto start = Clock::now();
  try {
    for (const auto& tier_conf : plan.tiers()) {
      if (tier_conf.empty() || tier_conf.front()->service == ServiceKind::client) continue;
      const auto tier_start = Clock::now();
      std::vector<ServiceRecord*> tier;
      for (const auto* conf : tier_conf) {
        auto it = std::find_if(h.services.begin(), h.services.end(), [&](auto& r) { return r.id == conf->id; });
        it->pid = spawn_daemon(daemon, *it, h);
        tier.push_back(&*it);
      }
      const auto deadline = tier_start + exec.health_timeout;
      while (true) {
        if (!tier_healthy(h, tier, mgmt)) break;
        if (std::all_of(tier.begin(), tier.end(), [](auto* r) { return r->state == ServiceState::running; })) break;
        if (Clock::now() >= deadline) {
          for (auto* r : tier) {
            if (r->state != ServiceState::pending) continue;
            r->state = ServiceState::failed;
            r->error = "health check timed out";
            break;
          }
          break;
        }
        std::this_thread::sleep_for(kPoll);
      }
      h.timings.emplace_back("tier:" + std::string(planner::to_string(tier_conf.front()->service)),
                             seconds_since(tier_start));
      if (h.failed()) break;
    }
  } catch (const ServiceFailed& e) {
    for (auto& r : h.services) {
      if (r.id == e.service()) {
        r.state = ServiceState::failed;
        r.error = e.what();
      }
    }
  }
  if (h.failed()) {
    std::vector<std::string> stopped, residuals;
    stop_services(h, stopped, residuals);
    for (const auto& disk : h.disk_directories()) scrub(disk, residuals);
    return h;
  }
  h.timings.emplace_back("deploy", seconds_since(start));
  h.save();
  return h;
}

DeploymentHandle& attach_clients(DeploymentHandle& h, const std::vector<inventory::NodeSpec>& compute_nodes) {
  if (compute_nodes.empty()) return h;
  const net::Endpoint mgmt = ministore::management_endpoint(h.plan.management(), h.realm);
  if (h.backend != Backend::local_process || !ping(mgmt)) {
    throw ManagementUnreachable("management at " + mgmt.to_string() + " does not answer");
  }
  if (!h.all_running()) throw StateError("cannot attach clients: not every service is running");
  std::set<std::string> seen;
  for (const auto& node : compute_nodes) {
    if (h.client_mounts.count(node.id) || !seen.insert(node.id).second) {
      throw AlreadyExists("client already attached on " + node.id);
    }
  }
  auto conf = h.plan.client_template();
  conf.options.emplace_back("realm", h.realm);
  const std::string doc = planner::render_config(conf);
  for (const auto& node : compute_nodes) {
    const fs::path point = h.working_root / "clients" / node.id;
    fs::create_directories(point);
    write_file(point / ministore::kClientConfigName, doc);
    ministore::Client::attach(point);  // proves the session resolves
    h.client_mounts[node.id] = point;
  }
  h.save();
  return h;
}

std::size_t TeardownReport::actions() const {
  std::size_t n = stopped.size() + mounts_removed;
  for (const auto& d : disks) n += d.entries_removed;
  return n;
}

std::uint64_t TeardownReport::bytes_scrubbed() const {
  std::uint64_t n = 0;
  for (const auto& d : disks) n += d.bytes_scrubbed;
  return n;
}

std::uint64_t TeardownReport::residual_entries() const {
  std::uint64_t n = 0;
  for (const auto& d : disks) n += d.residual_entries;
  return n;
}

void TeardownReport::write_csv(std::ostream& out) const {
  out << "disk,residual_entries,bytes_scrubbed\n";
  for (const auto& d : disks) out << d.disk.string() << "," << d.residual_entries << "," << d.bytes_scrubbed << "\n";
}

TeardownReport teardown(DeploymentHandle& h) {
  TeardownReport report;
  try {
    stop_services(h, report.stopped, report.residuals);
  } catch (const std::exception& e) {
    report.residuals.push_back(std::string("stopping services: ") + e.what());
  }
  for (const auto& [node, point] : h.client_mounts) {
    std::error_code ec;
    fs::remove_all(point, ec);
    if (ec) report.residuals.push_back(point.string() + ": " + ec.message());
    else ++report.mounts_removed;
  }
  h.client_mounts.clear();
  std::error_code ec;
  if (!h.working_root.empty() && fs::is_empty(h.working_root / "clients", ec)) fs::remove(h.working_root / "clients", ec);
  for (const auto& disk : h.disk_directories()) report.disks.push_back(scrub(disk, report.residuals));
  if (!h.working_root.empty()) fs::remove(h.state_path(), ec);
  return report;
}

namespace {

constexpr std::uint64_t kCopyBlock = kMiB;

void mkdir_p(ministore::Client& client, const std::string& path) {
  const std::string norm = ministore::normalize_path(path);
  if (norm == "/" || client.exists(norm)) return;
  mkdir_p(client, ministore::parent_of(norm));
  client.mkdir(norm);
}

std::string ns_join(const std::string& dir, const std::string& name) {
  return dir == "/" ? "/" + name : dir + "/" + name;
}

std::uint64_t copy_in(ministore::Client& client, const fs::path& src, const std::string& dst) {
  if (fs::is_directory(src)) {
    mkdir_p(client, dst);
    std::vector<fs::path> children;
    for (const auto& e : fs::directory_iterator(src)) children.push_back(e.path());
    std::sort(children.begin(), children.end());
    std::uint64_t total = 0;
    for (const auto& c : children) total += copy_in(client, c, ns_join(dst, c.filename().string()));
    return total;
  }
  std::ifstream in(src, std::ios::binary);
  if (!in) throw NotFound("cannot read " + src.string());
  if (client.exists(dst)) client.unlink(dst);
  auto meta = client.create(dst);
  std::vector<std::uint8_t> buf(kCopyBlock);
  std::uint64_t off = 0;
  while (in) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    client.write_at(meta, off, std::span<const std::uint8_t>(buf.data(), got));
    off += got;
  }
  client.fsync(meta);
  return off;
}

std::uint64_t copy_out(ministore::Client& client, const std::string& src, const fs::path& dst) {
  auto meta = client.stat(src);
  if (meta.is_directory) {
    fs::create_directories(dst);
    std::uint64_t total = 0;
    for (const auto& e : client.readdir(src)) total += copy_out(client, ns_join(src, e.name), dst / e.name);
    return total;
  }
  std::ofstream out(dst, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + dst.string());
  std::vector<std::uint8_t> buf(kCopyBlock);
  std::uint64_t off = 0;
  while (off < meta.size_bytes) {
    auto want = static_cast<std::size_t>(std::min<std::uint64_t>(kCopyBlock, meta.size_bytes - off));
    auto got = client.read_at(meta, off, std::span<std::uint8_t>(buf.data(), want));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(got));
    off += got;
    if (got < want) break;
  }
  if (!out.flush()) throw Error("cannot write " + dst.string());
  return off;
}

}  // namespace

std::uint64_t stage(const DeploymentHandle& h, StageDirection direction, const std::string& src,
                    const std::string& dst) {
  auto conf = h.plan.client_template();
  auto client = ministore::Client::from_config(conf, h.realm);
  if (direction == StageDirection::in) {
    const fs::path from(src);
    if (!fs::exists(from)) throw NotFound("stage-in source " + src + " does not exist");
    std::string to = ministore::normalize_path(dst);
    if (!fs::is_directory(from) && client.exists(to) && client.stat(to).is_directory) {
      to = ns_join(to, from.filename().string());
    }
    mkdir_p(client, ministore::parent_of(to));
    return copy_in(client, from, to);
  }
  const std::string from = ministore::normalize_path(src);
  if (!client.exists(from)) throw NotFound("stage-out source " + src + " does not exist");
  fs::path to(dst);
  if (!client.stat(from).is_directory && fs::is_directory(to)) to /= ministore::name_of(from);
  if (to.has_parent_path()) fs::create_directories(to.parent_path());
  return copy_out(client, from, to);
}

std::vector<pid_t> find_daemons(const fs::path& working_root) {
  std::error_code ec;
  const auto root = fs::weakly_canonical(working_root, ec).string();
  std::vector<pid_t> out;
  for (const auto& e : fs::directory_iterator("/proc", ec)) {
    const auto name = e.path().filename().string();
    if (name.empty() || !std::all_of(name.begin(), name.end(), ::isdigit)) continue;
    const auto pid = static_cast<pid_t>(std::stol(name));
    auto args = read_cmdline(pid);
    if (args.empty() || fs::path(args[0]).filename() != kDaemonName) continue;
    auto it = std::find(args.begin(), args.end(), "--working-root");
    if (it == args.end() || ++it == args.end() || *it != root) continue;
    char st = proc_state(pid);
    if (st == 'Z' || st == 'X' || st == 0) continue;
    out.push_back(pid);
  }
  return out;
}

}  // namespace ephemstore::executor
