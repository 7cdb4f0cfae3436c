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

#include "ephemstore/manifest.hpp"

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ephemstore/error.hpp"
#include "ephemstore/units.hpp"

namespace ephemstore::cli {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

void RunManifest::save() const {
  std::ostringstream out;
  const auto& p = policy;
  out << "inventory=" << inventory.string() << "\n"
      << "storage_nodes=" << storage_nodes << "\n"
      << "constraint=" << constraint << "\n"
      << "policy=" << policy_name << "\n"
      << "meta_disks_per_node=" << p.meta_disks_per_node << "\n"
      << "storage_disks_per_node=" << p.storage_disks_per_node << "\n"
      << "colocate_mgmt_on_first_meta=" << (p.colocate_mgmt_on_first_meta ? "true" : "false") << "\n"
      << "dedicated_mgmt_disks=" << p.dedicated_mgmt_disks << "\n"
      << "stripe_size_bytes=" << p.stripe_size_bytes << "\n"
      << "stripe_count=" << p.stripe_count << "\n"
      << "base_port=" << p.base_port << "\n"
      << "enable_xattr_metadata=" << (p.enable_xattr_metadata ? "true" : "false") << "\n"
      << "allocations=" << join(allocation_ids) << "\n"
      << "backend=" << backend << "\n"
      << "working_root=" << working_root.string() << "\n"
      << "bench_runs=" << join(bench_runs) << "\n";
  fs::create_directories(out_dir);
  const fs::path tmp = out_dir / (std::string(kManifestName) + ".tmp");
  {
    std::ofstream f(tmp, std::ios::trunc);
    f << out.str();
    if (!f.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, out_dir / kManifestName);
}

bool RunManifest::exists(const fs::path& out_dir) { return fs::exists(out_dir / kManifestName); }

RunManifest RunManifest::load(const fs::path& out_dir) {
  std::ifstream in(out_dir / kManifestName);
  if (!in) throw StateError("no run manifest in " + out_dir.string() + " (run 'plan' first)");
  RunManifest m;
  m.out_dir = out_dir;
  auto& p = m.policy;
  std::string line;
  int lineno = 0;
  auto flag = [&](const std::string& v) {
    if (v != "true" && v != "false") throw ParseError(lineno, "expected true or false");
    return v == "true";
  };
  auto u32 = [](const std::string& v) { return static_cast<std::uint32_t>(parse_uint(v)); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value in run manifest");
    const std::string key = line.substr(0, eq), v = line.substr(eq + 1);
    if (key == "inventory") m.inventory = v;
    else if (key == "storage_nodes") m.storage_nodes = u32(v);
    else if (key == "constraint") m.constraint = v;
    else if (key == "policy") m.policy_name = v;
    else if (key == "meta_disks_per_node") p.meta_disks_per_node = u32(v);
    else if (key == "storage_disks_per_node") p.storage_disks_per_node = u32(v);
    else if (key == "colocate_mgmt_on_first_meta") p.colocate_mgmt_on_first_meta = flag(v);
    else if (key == "dedicated_mgmt_disks") p.dedicated_mgmt_disks = u32(v);
    else if (key == "stripe_size_bytes") p.stripe_size_bytes = parse_uint(v);
    else if (key == "stripe_count") p.stripe_count = u32(v);
    else if (key == "base_port") p.base_port = u32(v);
    else if (key == "enable_xattr_metadata") p.enable_xattr_metadata = flag(v);
    else if (key == "allocations") m.allocation_ids = split(v);
    else if (key == "backend") m.backend = v;
    else if (key == "working_root") m.working_root = v;
    else if (key == "bench_runs") m.bench_runs = split(v);
    else throw ParseError(lineno, "unknown run manifest key '" + key + "'");
  }
  return m;
}

RunLock::RunLock(const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const fs::path path = out_dir / kLockName;
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw StateError("another command is running in " + out_dir.string());
  }
}

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace ephemstore::cli
