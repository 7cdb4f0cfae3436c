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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ephemstore/planner.hpp"
#include "ephemstore/registry.hpp"
#include "ephemstore/socket.hpp"
#include "ephemstore/stripe.hpp"

namespace ephemstore::ministore {

struct ChunkRecord {
  std::uint64_t file_id = 0;
  std::uint64_t chunk = 0;
  std::uint64_t length = 0;
};

struct TargetInfo {
  std::string target_id;
  std::uint64_t used_bytes = 0;
  std::uint64_t capacity_bytes = 0;
  std::vector<ChunkRecord> chunks;
};

struct DirEntry {
  std::string name;
  bool is_directory = false;
};

// File name of the client configuration inside an attach point.
inline constexpr const char* kClientConfigName = "client.conf";

// User-space client session of one deployed namespace. A session holds one
// connection per service and is not thread-safe: give every worker its own.
class Client {
 public:
  struct Options {
    std::string realm;
    net::Endpoint management;
    std::uint64_t stripe_size = 0;  // 0: ask for the planned default
    std::uint32_t stripe_count = 0;
    std::chrono::milliseconds timeout{30000};
  };

  // Throws ManagementUnreachable when the registry does not answer.
  explicit Client(Options options);

  static Client from_config(const planner::ServiceConfig& client_config, const std::string& realm);
  // Reads <attach_point>/client.conf written by the executor.
  static Client attach(const std::filesystem::path& attach_point);

  std::uint64_t namespace_id() const { return snapshot_.namespace_id; }
  const RegistrySnapshot& registry() const { return snapshot_; }
  RegistrySnapshot refresh_registry();

  FileMeta create(const std::string& path);
  FileMeta create(const std::string& path, std::uint64_t stripe_size, std::uint32_t stripe_count);
  FileMeta stat(const std::string& path);
  bool exists(const std::string& path);
  void mkdir(const std::string& path);
  void rmdir(const std::string& path);
  // Removes the entry and every chunk of the file from its targets.
  void unlink(const std::string& path);
  std::vector<DirEntry> readdir(const std::string& path);

  // Returns bytes written. Gaps between the old end of file and `offset`
  // read back as zeros.
  std::uint64_t write(const std::string& path, std::uint64_t offset, std::span<const std::uint8_t> data);
  std::vector<std::uint8_t> read(const std::string& path, std::uint64_t offset, std::uint64_t length);

  // Variants working on an already-resolved file; `meta.size_bytes` is
  // refreshed from the metadata service after each write.
  std::uint64_t write_at(FileMeta& meta, std::uint64_t offset, std::span<const std::uint8_t> data);
  std::size_t read_at(const FileMeta& meta, std::uint64_t offset, std::span<std::uint8_t> out);
  void fsync(const FileMeta& meta);

  TargetInfo target_info(const std::string& target_id);

 private:
  net::Connection& metadata_for_dir(const std::string& dir);
  net::Connection& target(const std::string& target_id);
  net::Reply meta_call(const std::string& dir, wire::Opcode op, std::span<const std::uint8_t> payload);
  net::Reply target_call(const std::string& target_id, wire::Opcode op, std::span<const std::uint8_t> payload);
  void connect_services();

  Options options_;
  RegistrySnapshot snapshot_;
  std::vector<RegistryEntry> metadata_;
  std::map<std::string, RegistryEntry> targets_;
  std::vector<net::Connection> metadata_conns_;
  std::map<std::string, net::Connection> target_conns_;
};

}  // namespace ephemstore::ministore
