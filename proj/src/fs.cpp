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

#include "ephemstore/fs.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ephemstore/error.hpp"

namespace ephemstore::vfs {

bool FileSystem::exists(const std::string& path) {
  try {
    stat(path);
    return true;
  } catch (const NotFound&) {
    return false;
  }
}

std::size_t remove_tree(FileSystem& fs, const std::string& path) {
  Stat st = fs.stat(path);
  if (!st.is_directory) {
    fs.unlink(path);
    return 1;
  }
  std::size_t removed = 0;
  for (const auto& e : fs.list(path)) {
    const std::string child = (path == "/" ? "" : path) + "/" + e.name;
    removed += remove_tree(fs, child);
  }
  if (path != "/") {
    fs.rmdir(path);
    ++removed;
  }
  return removed;
}

namespace {

// ----------------------------------------------------------------- ministore

class MinistoreFile final : public File {
 public:
  MinistoreFile(ministore::Client& client, ministore::FileMeta meta) : client_(client), meta_(std::move(meta)) {}

  void write_at(std::uint64_t offset, std::span<const std::uint8_t> data) override {
    client_.write_at(meta_, offset, data);
  }
  std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) override {
    return client_.read_at(meta_, offset, out);
  }
  std::uint64_t size() override {
    meta_ = client_.stat(meta_.path);
    return meta_.size_bytes;
  }
  void sync() override { client_.fsync(meta_); }

 private:
  ministore::Client& client_;
  ministore::FileMeta meta_;
};

class MinistoreFs final : public FileSystem {
 public:
  explicit MinistoreFs(ministore::Client client) : client_(std::move(client)) {}

  std::unique_ptr<File> create(const std::string& path) override {
    return std::make_unique<MinistoreFile>(client_, client_.create(path));
  }
  std::unique_ptr<File> open(const std::string& path) override {
    auto meta = client_.stat(path);
    if (meta.is_directory) throw IsADirectory(path + " is a directory");
    return std::make_unique<MinistoreFile>(client_, std::move(meta));
  }
  void mkdir(const std::string& path) override { client_.mkdir(path); }
  void rmdir(const std::string& path) override { client_.rmdir(path); }
  void unlink(const std::string& path) override { client_.unlink(path); }
  Stat stat(const std::string& path) override {
    auto meta = client_.stat(path);
    return Stat{meta.is_directory, meta.size_bytes};
  }
  std::vector<ministore::DirEntry> list(const std::string& path) override { return client_.readdir(path); }
  std::string describe() const override { return "ministore"; }

 private:
  ministore::Client client_;
};

// --------------------------------------------------------------------- posix

[[noreturn]] void throw_errno(const std::string& what, const std::string& path) {
  const int err = errno;
  const std::string msg = what + " " + path + ": " + std::strerror(err);
  switch (err) {
    case ENOENT: throw NotFound(msg);
    case EEXIST: throw AlreadyExists(msg);
    case ENOTEMPTY: throw NotEmpty(msg);
    case ENOTDIR: throw NotADirectory(msg);
    case EISDIR: throw IsADirectory(msg);
    case ENOSPC: throw NamespaceFull(path, msg);
    default: throw Error(msg);
  }
}

class PosixFile final : public File {
 public:
  PosixFile(int fd, std::string path) : fd_(fd), path_(std::move(path)) {}
  ~PosixFile() override { ::close(fd_); }

  void write_at(std::uint64_t offset, std::span<const std::uint8_t> data) override {
    std::size_t done = 0;
    while (done < data.size()) {
      ssize_t n = ::pwrite(fd_, data.data() + done, data.size() - done, static_cast<off_t>(offset + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("write", path_);
      }
      done += static_cast<std::size_t>(n);
    }
  }
  std::size_t read_at(std::uint64_t offset, std::span<std::uint8_t> out) override {
    std::size_t done = 0;
    while (done < out.size()) {
      ssize_t n = ::pread(fd_, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw_errno("read", path_);
      }
      if (n == 0) break;
      done += static_cast<std::size_t>(n);
    }
    return done;
  }
  std::uint64_t size() override {
    struct stat st{};
    if (::fstat(fd_, &st) != 0) throw_errno("stat", path_);
    return static_cast<std::uint64_t>(st.st_size);
  }
  void sync() override {
    if (::fsync(fd_) != 0) throw_errno("fsync", path_);
  }

 private:
  int fd_;
  std::string path_;
};

class PosixFs final : public FileSystem {
 public:
  explicit PosixFs(std::filesystem::path root) : root_(std::move(root)) {}

  std::unique_ptr<File> create(const std::string& path) override {
    auto p = resolve(path);
    int fd = ::open(p.c_str(), O_RDWR | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
    if (fd < 0) throw_errno("create", p);
    return std::make_unique<PosixFile>(fd, p);
  }
  std::unique_ptr<File> open(const std::string& path) override {
    auto p = resolve(path);
    int fd = ::open(p.c_str(), O_RDWR | O_CLOEXEC);
    if (fd < 0) throw_errno("open", p);
    return std::make_unique<PosixFile>(fd, p);
  }
  void mkdir(const std::string& path) override {
    auto p = resolve(path);
    if (::mkdir(p.c_str(), 0755) != 0) throw_errno("mkdir", p);
  }
  void rmdir(const std::string& path) override {
    auto p = resolve(path);
    if (::rmdir(p.c_str()) != 0) throw_errno("rmdir", p);
  }
  void unlink(const std::string& path) override {
    auto p = resolve(path);
    if (::unlink(p.c_str()) != 0) throw_errno("unlink", p);
  }
  Stat stat(const std::string& path) override {
    auto p = resolve(path);
    struct stat st{};
    if (::stat(p.c_str(), &st) != 0) throw_errno("stat", p);
    return Stat{S_ISDIR(st.st_mode), static_cast<std::uint64_t>(st.st_size)};
  }
  std::vector<ministore::DirEntry> list(const std::string& path) override {
    std::vector<ministore::DirEntry> out;
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(resolve(path), ec)) {
      out.push_back({e.path().filename().string(), e.is_directory()});
    }
    if (ec) throw NotFound("list " + path + ": " + ec.message());
    return out;
  }
  std::string describe() const override { return "posix:" + root_.string(); }

 private:
  std::string resolve(const std::string& path) const {
    auto norm = ministore::normalize_path(path);
    return (root_ / norm.substr(1)).string();
  }

  std::filesystem::path root_;
};

}  // namespace

std::unique_ptr<FileSystem> make_ministore_fs(ministore::Client client) {
  return std::make_unique<MinistoreFs>(std::move(client));
}

std::unique_ptr<FileSystem> make_posix_fs(std::filesystem::path root) {
  return std::make_unique<PosixFs>(std::move(root));
}

FileSystemFactory posix_factory(std::filesystem::path root) {
  return [root](std::size_t) { return make_posix_fs(root); };
}

FileSystemFactory attach_factory(std::vector<std::filesystem::path> attach_points) {
  if (attach_points.empty()) throw UsageError("no attach points");
  return [points = std::move(attach_points)](std::size_t worker) {
    return make_ministore_fs(ministore::Client::attach(points[worker % points.size()]));
  };
}

FileSystemFactory client_factory(planner::ServiceConfig client_config, std::string realm) {
  return [conf = std::move(client_config), realm = std::move(realm)](std::size_t) {
    return make_ministore_fs(ministore::Client::from_config(conf, realm));
  };
}

}  // namespace ephemstore::vfs
