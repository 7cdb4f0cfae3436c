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

#include "support.hpp"

#include <sys/wait.h>
#include <fcntl.h>
#include <spawn.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ephemstore/client.hpp"
#include "ephemstore/inventory.hpp"

extern char** environ;

namespace testsupport {

using namespace ephemstore;

TempDir::TempDir(const std::string& tag) {
  std::string tmpl = (fs::temp_directory_path() / (tag + "-XXXXXX")).string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = fs::canonical(tmpl);
}

TempDir::~TempDir() {
  std::error_code ec;
  // Undo read-only fault injection before removal.
  for (auto it = fs::recursive_directory_iterator(path_, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_directory(ec)) fs::permissions(it->path(), fs::perms::owner_all, fs::perm_options::add, ec);
  }
  fs::remove_all(path_, ec);
}

fs::path source_dir() { return EPHEMSTORE_SOURCE_DIR; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string dom_inventory() { return read_file(source_dir() / "inventories" / "dom.inv"); }
std::string ault_inventory() { return read_file(source_dir() / "inventories" / "ault.inv"); }

std::string local_inventory(std::size_t storage_nodes, std::size_t disks, std::size_t compute_nodes,
                            std::uint64_t capacity) {
  std::ostringstream out;
  for (std::size_t c = 1; c <= compute_nodes; ++c) {
    out << "[node cn" << (c < 10 ? "0" : "") << c << "]\nkind = compute\ncpus = 4\ndram_bytes = 8589934592\n\n";
  }
  for (std::size_t s = 1; s <= storage_nodes; ++s) {
    const std::string id = std::string("ls") + (s < 10 ? "0" : "") + std::to_string(s);
    out << "[node " << id << "]\nkind = storage\nfeatures = storage\ncpus = 4\ndram_bytes = 8589934592\n";
    for (std::size_t d = 0; d < disks; ++d) {
      out << "disk = d" << d << ",/scratch/" << id << "/d" << d << "," << capacity << ",1000000000,1000000000\n";
    }
    out << "\n";
  }
  return out.str();
}

planner::DeploymentPlan make_plan(const std::string& inventory_text, std::size_t storage_nodes,
                                  const planner::DeploymentPolicy& policy) {
  inventory::AllocationRegistry reg(inventory::load_inventory(inventory_text));
  auto alloc = reg.request({storage_nodes, "", inventory::Purpose::storage});
  return planner::plan_deployment(alloc, policy);
}

Cluster::Cluster(const std::string& inventory_text, std::size_t storage_nodes, planner::DeploymentPolicy policy)
    : dir("cluster") {
  cluster = std::make_unique<ministore::LocalCluster>(make_plan(inventory_text, storage_nodes, policy),
                                                      dir.path() / "root");
  cluster->start();
}

void FlatFileOracle::write(const std::string& path, std::uint64_t offset, const std::vector<std::uint8_t>& data) {
  auto& f = files_.at(path);
  if (f.size() < offset + data.size()) f.resize(offset + data.size(), 0);
  std::copy(data.begin(), data.end(), f.begin() + static_cast<std::ptrdiff_t>(offset));
}

std::vector<std::uint8_t> FlatFileOracle::read(const std::string& path, std::uint64_t offset,
                                               std::uint64_t length) const {
  const auto& f = files_.at(path);
  if (offset >= f.size()) return {};
  const auto end = std::min<std::uint64_t>(f.size(), offset + length);
  return {f.begin() + static_cast<std::ptrdiff_t>(offset), f.begin() + static_cast<std::ptrdiff_t>(end)};
}

StripingOutcome run_striping_property(std::size_t targets, std::uint64_t stripe, std::size_t schedules,
                                      std::uint64_t seed, std::size_t balance_files) {
  const std::size_t nodes = targets >= 4 ? 2 : 1;
  const std::size_t per_node = targets / nodes;
  auto policy = planner::DeploymentPolicy::dom();
  policy.storage_disks_per_node = static_cast<std::uint32_t>(per_node);
  policy.stripe_size_bytes = stripe;
  Cluster c(local_inventory(nodes, per_node + 1, 1, 1ULL << 40), nodes, policy);
  auto writer = c->client();
  auto reader = c->client();

  StripingOutcome out;
  std::mt19937_64 rng(seed);
  auto fail = [&](const std::string& what) {
    ++out.mismatches;
    if (out.first_failure.empty()) out.first_failure = what;
  };
  // Offsets cluster around stripe boundaries; most lengths are small.
  auto pick_offset = [&] {
    const std::uint64_t k = rng() % 5;
    const std::uint64_t base = k * stripe;
    switch (rng() % 3) {
      case 0: return base;
      case 1: return base + rng() % stripe;
      default: {
        const std::uint64_t back = rng() % 300;
        return base > back ? base - back : base + back;
      }
    }
  };
  auto pick_length = [&]() -> std::uint64_t {
    switch (rng() % 10) {
      case 0: return stripe + rng() % (stripe / 2);
      case 1: return 1 + rng() % (stripe / 4);
      default: return 1 + rng() % 2048;
    }
  };

  for (std::size_t s = 0; s < schedules; ++s) {
    const std::string path = "/sched." + std::to_string(s);
    FlatFileOracle oracle;
    oracle.create(path);
    auto meta = writer.create(path);
    const std::size_t ops = 4 + rng() % 8;
    for (std::size_t o = 0; o < ops; ++o) {
      const std::uint64_t off = pick_offset();
      const std::uint64_t len = pick_length();
      if (rng() % 3 != 0) {
        std::vector<std::uint8_t> data(len);
        for (auto& b : data) b = static_cast<std::uint8_t>(rng());
        writer.write_at(meta, off, data);
        oracle.write(path, off, data);
        out.bytes_written += len;
      } else {
        ++out.reads_checked;
        auto& session = rng() % 2 ? writer : reader;
        if (session.read(path, off, len) != oracle.read(path, off, len)) {
          fail(path + ": read " + std::to_string(off) + "+" + std::to_string(len) + " differs");
        }
      }
    }
    ++out.reads_checked;
    if (reader.stat(path).size_bytes != oracle.size(path)) fail(path + ": size differs");
    if (reader.read(path, 0, oracle.size(path) + 10) != oracle.contents(path)) fail(path + ": contents differ");
    writer.unlink(path);
    ++out.schedules;
  }

  for (std::size_t f = 0; f < balance_files; ++f) {
    const std::string path = "/seq." + std::to_string(f);
    auto meta = writer.create(path);
    const std::uint64_t size = (rng() % (3 * targets + 1)) * stripe + rng() % stripe + 1;
    std::vector<std::uint8_t> block(std::min<std::uint64_t>(size, 256 * 1024), 0x5a);
    for (std::uint64_t off = 0; off < size; off += block.size()) {
      const auto n = std::min<std::uint64_t>(block.size(), size - off);
      writer.write_at(meta, off, std::span<const std::uint8_t>(block.data(), n));
    }
    std::vector<std::uint64_t> per_target;
    for (const auto& t : meta.stripe.targets) {
      std::uint64_t bytes = 0;
      for (const auto& ch : writer.target_info(t).chunks) {
        if (ch.file_id == meta.file_id) bytes += ch.length;
      }
      per_target.push_back(bytes);
    }
    std::uint64_t total = 0;
    for (auto b : per_target) total += b;
    const auto [lo, hi] = std::minmax_element(per_target.begin(), per_target.end());
    ++out.balance_files;
    if (total != size || *hi - *lo > stripe) {
      ++out.balance_violations;
      if (out.first_failure.empty()) out.first_failure = path + ": per-target bytes out of balance";
    }
    writer.unlink(path);
  }
  return out;
}

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t float_bits(float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, sizeof u);
  return u;
}

}  // namespace

std::vector<std::uint8_t> reference_particle_bytes(float xx, float yy, float zz, float vx, float vy, float vz,
                                                   float phi, std::int64_t pid, std::uint16_t mask) {
  std::vector<std::uint8_t> out;
  for (float f : {xx, yy, zz, vx, vy, vz, phi}) put_le(out, float_bits(f), 4);
  put_le(out, static_cast<std::uint64_t>(pid), 8);
  put_le(out, mask, 2);
  return out;
}

int run_command(const std::vector<std::string>& argv, std::string* out,
                const std::map<std::string, std::string>& env) {
  char tmpl[] = "/tmp/ephemstore-cmd-XXXXXX";
  int fd = ::mkstemp(tmpl);
  if (fd < 0) throw std::runtime_error("mkstemp failed");
  std::vector<std::string> args = argv;
  std::vector<char*> cargv;
  for (auto& a : args) cargv.push_back(a.data());
  cargv.push_back(nullptr);

  std::vector<std::string> envs;
  for (char** e = environ; *e; ++e) {
    std::string kv = *e;
    if (!env.count(kv.substr(0, kv.find('=')))) envs.push_back(kv);
  }
  for (const auto& [k, v] : env) envs.push_back(k + "=" + v);
  std::vector<char*> cenv;
  for (auto& e : envs) cenv.push_back(e.data());
  cenv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fd, 1);
  posix_spawn_file_actions_adddup2(&actions, fd, 2);
  pid_t pid = 0;
  int rc = ::posix_spawn(&pid, cargv[0], &actions, nullptr, cargv.data(), cenv.data());
  posix_spawn_file_actions_destroy(&actions);
  ::close(fd);
  if (rc != 0) throw std::runtime_error(std::string("spawn failed: ") + std::strerror(rc));
  int status = 0;
  ::waitpid(pid, &status, 0);
  if (out) *out = read_file(tmpl);
  ::unlink(tmpl);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

namespace {

class CorruptingFile final : public ephemstore::vfs::File {
 public:
  CorruptingFile(std::unique_ptr<ephemstore::vfs::File> inner, std::uint64_t at) : inner_(std::move(inner)), at_(at) {}
  void write_at(std::uint64_t off, std::span<const std::uint8_t> d) override { inner_->write_at(off, d); }
  std::size_t read_at(std::uint64_t off, std::span<std::uint8_t> out) override {
    const auto n = inner_->read_at(off, out);
    if (at_ >= off && at_ < off + n) out[at_ - off] ^= 0xff;
    return n;
  }
  std::uint64_t size() override { return inner_->size(); }
  void sync() override { inner_->sync(); }

 private:
  std::unique_ptr<ephemstore::vfs::File> inner_;
  std::uint64_t at_;
};

}  // namespace

std::unique_ptr<ephemstore::vfs::File> CorruptingFs::open(const std::string& p) {
  auto f = inner_->open(p);
  if (p.find(needle_) == std::string::npos) return f;
  return std::make_unique<CorruptingFile>(std::move(f), offset_);
}

ephemstore::vfs::FileSystemFactory corrupting_factory(ephemstore::vfs::FileSystemFactory inner, std::string needle,
                                                      std::uint64_t offset) {
  return [inner = std::move(inner), needle = std::move(needle), offset](std::size_t w) {
    return std::make_unique<CorruptingFs>(inner(w), needle, offset);
  };
}

fs::path cli_path() { return EPHEMSTORE_CLI_PATH; }
fs::path daemon_path() { return EPHEMSTORE_DAEMON_BIN; }

}  // namespace testsupport
