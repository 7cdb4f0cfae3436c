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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ephemstore/client.hpp"

namespace ephemstore::vfs {

struct Stat {
  bool is_directory = false;
  std::uint64_t size_bytes = 0;
};

class File {
 public:
  virtual ~File() = default;
  virtual void write_at(std::uint64_t offset, std::span<const std::uint8_t> data) = 0;
  // Returns bytes read; short only at end of file.
  virtual std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) = 0;
  virtual std::uint64_t size() = 0;
  virtual void sync() = 0;
};

// The namespace a benchmark runs against: a ministore session or a plain
// directory on a local or global file system. Errors map onto the library
// exception types (NotFound, AlreadyExists, NotEmpty, ...).
class FileSystem {
 public:
  virtual ~FileSystem() = default;
  virtual std::unique_ptr<File> create(const std::string& path) = 0;
  virtual std::unique_ptr<File> open(const std::string& path) = 0;
  virtual void mkdir(const std::string& path) = 0;
  virtual void rmdir(const std::string& path) = 0;
  virtual void unlink(const std::string& path) = 0;
  virtual Stat stat(const std::string& path) = 0;
  virtual std::vector<ministore::DirEntry> list(const std::string& path) = 0;
  virtual std::string describe() const = 0;

  bool exists(const std::string& path);
};

std::unique_ptr<FileSystem> make_ministore_fs(ministore::Client client);
std::unique_ptr<FileSystem> make_posix_fs(std::filesystem::path root);

// Opens one session per benchmark worker.
using FileSystemFactory = std::function<std::unique_ptr<FileSystem>(std::size_t worker)>;

FileSystemFactory posix_factory(std::filesystem::path root);
// Workers are spread over the attach points round-robin.
FileSystemFactory attach_factory(std::vector<std::filesystem::path> attach_points);
FileSystemFactory client_factory(planner::ServiceConfig client_config, std::string realm);

// Recursive removal of a namespace subtree; returns entries removed.
std::size_t remove_tree(FileSystem& fs, const std::string& path);

}  // namespace ephemstore::vfs
