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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ephemstore/cluster.hpp"
#include "ephemstore/fs.hpp"
#include "ephemstore/inventory.hpp"
#include "ephemstore/planner.hpp"

namespace testsupport {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "ephemstore");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

fs::path source_dir();
std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& text);

// Inventory documents.
std::string dom_inventory();    // inventories/dom.inv
std::string ault_inventory();   // inventories/ault.inv
// `storage_nodes` storage nodes with `disks` disks each, plus compute nodes.
std::string local_inventory(std::size_t storage_nodes, std::size_t disks, std::size_t compute_nodes = 2,
                            std::uint64_t capacity = 1ULL << 30);

ephemstore::planner::DeploymentPlan make_plan(const std::string& inventory, std::size_t storage_nodes,
                                              const ephemstore::planner::DeploymentPolicy& policy);

// A running in-process deployment under a temp dir.
struct Cluster {
  Cluster(const std::string& inventory, std::size_t storage_nodes, ephemstore::planner::DeploymentPolicy policy);
  TempDir dir;
  std::unique_ptr<ephemstore::ministore::LocalCluster> cluster;
  ephemstore::ministore::LocalCluster* operator->() { return cluster.get(); }
};

// Byte-level shadow of a namespace of flat files: writes past the end pad
// with zeros, reads stop at the end.
class FlatFileOracle {
 public:
  void create(const std::string& path) { files_[path]; }
  void write(const std::string& path, std::uint64_t offset, const std::vector<std::uint8_t>& data);
  std::vector<std::uint8_t> read(const std::string& path, std::uint64_t offset, std::uint64_t length) const;
  std::uint64_t size(const std::string& path) const { return files_.at(path).size(); }
  const std::vector<std::uint8_t>& contents(const std::string& path) const { return files_.at(path); }

 private:
  std::map<std::string, std::vector<std::uint8_t>> files_;
};

struct StripingOutcome {
  std::size_t schedules = 0;
  std::size_t reads_checked = 0;
  std::size_t mismatches = 0;
  std::uint64_t bytes_written = 0;
  std::size_t balance_files = 0;
  std::size_t balance_violations = 0;
  std::string first_failure;
};

// Deploys `targets` storage targets with the given stripe size, replays
// random write/read schedules against both the store and a FlatFileOracle,
// then checks per-target balance of sequentially written files.
StripingOutcome run_striping_property(std::size_t targets, std::uint64_t stripe, std::size_t schedules,
                                      std::uint64_t seed, std::size_t balance_files = 16);

// Reference little-endian record layout: seven float32 fields, int64 id,
// uint16 mask, packed.
std::vector<std::uint8_t> reference_particle_bytes(float xx, float yy, float zz, float vx, float vy, float vz,
                                                   float phi, std::int64_t pid, std::uint16_t mask);

// Wraps a file system and flips the byte at `offset` in every read of a
// file whose path contains `needle`.
class CorruptingFs final : public ephemstore::vfs::FileSystem {
 public:
  CorruptingFs(std::unique_ptr<ephemstore::vfs::FileSystem> inner, std::string needle, std::uint64_t offset)
      : inner_(std::move(inner)), needle_(std::move(needle)), offset_(offset) {}

  std::unique_ptr<ephemstore::vfs::File> create(const std::string& p) override { return inner_->create(p); }
  std::unique_ptr<ephemstore::vfs::File> open(const std::string& p) override;
  void mkdir(const std::string& p) override { inner_->mkdir(p); }
  void rmdir(const std::string& p) override { inner_->rmdir(p); }
  void unlink(const std::string& p) override { inner_->unlink(p); }
  ephemstore::vfs::Stat stat(const std::string& p) override { return inner_->stat(p); }
  std::vector<ephemstore::ministore::DirEntry> list(const std::string& p) override { return inner_->list(p); }
  std::string describe() const override { return "corrupting " + inner_->describe(); }

 private:
  std::unique_ptr<ephemstore::vfs::FileSystem> inner_;
  std::string needle_;
  std::uint64_t offset_;
};

ephemstore::vfs::FileSystemFactory corrupting_factory(ephemstore::vfs::FileSystemFactory inner, std::string needle,
                                                      std::uint64_t offset);

// Runs a command line; returns its exit status, output in `out`.
int run_command(const std::vector<std::string>& argv, std::string* out = nullptr,
                const std::map<std::string, std::string>& env = {});
fs::path cli_path();
fs::path daemon_path();

}  // namespace testsupport
