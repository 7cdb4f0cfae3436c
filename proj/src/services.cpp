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

#include "ephemstore/services.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/statvfs.h>
#include <sys/xattr.h>
#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ephemstore/error.hpp"
#include "ephemstore/stripe.hpp"
#include "ephemstore/units.hpp"

namespace ephemstore::ministore {

namespace fs = std::filesystem;
using wire::Decoder;
using wire::Encoder;
using wire::Opcode;
using wire::Status;

net::Endpoint service_endpoint(const planner::ServiceConfig& config, const std::string& realm) {
  return net::Endpoint{realm, config.address, config.listen_port};
}

net::Endpoint management_endpoint(const planner::ServiceConfig& config, const std::string& realm) {
  return net::Endpoint{realm, config.mgmt_address, config.mgmt_port};
}

void prepare_data_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create data directory " + dir.string() + ": " + ec.message());
  struct stat st{};
  if (::stat(dir.c_str(), &st) != 0 || !S_ISDIR(st.st_mode)) {
    throw Error("data directory " + dir.string() + " is not a directory");
  }
  struct statvfs vfs{};
  const bool ro_mount = ::statvfs(dir.c_str(), &vfs) == 0 && (vfs.f_flag & ST_RDONLY);
  // Mode bits are checked explicitly: privileged daemons bypass access(2).
  if (ro_mount || (st.st_mode & (S_IWUSR | S_IWGRP | S_IWOTH)) == 0) {
    throw Error("data directory " + dir.string() + " is read-only");
  }
}

namespace {

std::vector<std::uint8_t> ok_with(Encoder& enc) { return net::ok_reply(enc.buffer()); }

std::vector<std::uint8_t> fail(Status s, const std::string& msg) { return net::error_reply(s, msg); }

}  // namespace

// ---------------------------------------------------------------------------
// Service host

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  endpoint_ = service_endpoint(options_.config, options_.realm);
}

Service::~Service() {
  request_stop();
  for (auto& t : conn_threads_) {
    if (t.joinable()) t.join();
  }
}

RegistryEntry Service::registry_entry() const {
  const auto& c = options_.config;
  return RegistryEntry{c.service, c.id, c.address, c.listen_port, 0, 0};
}

void Service::start() {
  prepare_data_dir(options_.data_dir);
  listener_ = net::listen_on(endpoint_);
  on_start();
  if (registers()) {
    try {
      register_service(management_endpoint(options_.config, options_.realm), registry_entry());
    } catch (...) {
      listener_.reset();
      throw;
    }
  }
}

void Service::run() {
  if (!listener_) throw Error("service " + options_.config.id + " not started");
  while (!stop_.load()) {
    pollfd p{listener_.get(), POLLIN, 0};
    int r = ::poll(&p, 1, 100);
    if (r <= 0 || !(p.revents & POLLIN)) continue;
    int fd = ::accept4(listener_.get(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    std::lock_guard lock(conn_mutex_);
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
  on_stop();
  listener_.reset();
  {
    std::lock_guard lock(conn_mutex_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : conn_threads_) {
    if (t.joinable()) t.join();
  }
  conn_threads_.clear();
}

void Service::serve_connection(int fd) {
  while (!stop_.load()) {
    std::optional<wire::Frame> frame;
    try {
      frame = net::recv_frame(fd);
    } catch (const Error&) {
      break;
    }
    if (!frame) break;
    std::vector<std::uint8_t> reply;
    const auto op = static_cast<Opcode>(frame->opcode);
    if (!wire::is_known(frame->opcode)) {
      reply = fail(Status::bad_request, "unknown opcode " + std::to_string(frame->opcode));
    } else if (op == Opcode::shutdown) {
      reply = net::ok_reply();
    } else {
      Decoder dec(frame->payload);
      try {
        reply = handle(op, dec);
      } catch (const ProtocolError& e) {
        reply = fail(Status::bad_request, e.what());
      } catch (const std::exception& e) {
        reply = fail(Status::io_error, e.what());
      }
    }
    try {
      net::send_frame(fd, frame->opcode | wire::kReplyBit, reply);
    } catch (const Error&) {
      break;
    }
    if (op == Opcode::shutdown) request_stop();
  }
  std::lock_guard lock(conn_mutex_);
  conn_fds_.remove(fd);
  ::close(fd);
}

// ---------------------------------------------------------------------------
// Management: the registry every other service announces itself to.

namespace {

class ManagementService final : public Service {
 public:
  explicit ManagementService(ServiceOptions o) : Service(std::move(o)) {}

 protected:
  bool registers() const override { return false; }

  void on_start() override {
    dir_ = data_dir() / "mgmt";
    fs::create_directories(dir_);
    const auto now = std::chrono::steady_clock::now().time_since_epoch().count();
    snapshot_.namespace_id = fnv1a(options_.realm + "/" + options_.config.id + "/" +
                                   std::to_string(now) + "/" + std::to_string(::getpid())) | 1;
    snapshot_.expected_metadata =
        static_cast<std::uint32_t>(parse_uint(options_.config.option("expected_metadata", "0")));
    snapshot_.expected_storage =
        static_cast<std::uint32_t>(parse_uint(options_.config.option("expected_storage", "0")));
    persist();
  }

  std::vector<std::uint8_t> handle(Opcode op, Decoder& req) override {
    Encoder enc;
    switch (op) {
      case Opcode::ping: {
        std::lock_guard lock(mutex_);
        enc.u64(snapshot_.namespace_id);
        return ok_with(enc);
      }
      case Opcode::register_service: {
        RegistryEntry entry = decode_entry(req);
        std::lock_guard lock(mutex_);
        for (const auto& e : snapshot_.entries) {
          if (e.id == entry.id) return fail(Status::duplicate, "service " + entry.id + " already registered");
        }
        snapshot_.entries.push_back(entry);
        persist();
        encode(enc, snapshot_);
        return ok_with(enc);
      }
      case Opcode::snapshot: {
        std::lock_guard lock(mutex_);
        encode(enc, snapshot_);
        return ok_with(enc);
      }
      default:
        return fail(Status::bad_request, "management does not handle " + std::string(to_string(op)));
    }
  }

 private:
  void persist() {
    std::ofstream out(dir_ / "registry.txt", std::ios::trunc);
    out << "namespace " << snapshot_.namespace_id << "\n";
    for (const auto& e : snapshot_.entries) {
      out << planner::to_string(e.kind) << " " << e.id << " " << e.address << ":" << e.port << "\n";
    }
  }

  fs::path dir_;
  std::mutex mutex_;
  RegistrySnapshot snapshot_;
};

// ---------------------------------------------------------------------------
// Metadata: one shard of the namespace. Entries live on the shard of their
// parent directory; a directory's marker (and so its children) lives on the
// shard of the directory itself.

class MetadataService final : public Service {
 public:
  explicit MetadataService(ServiceOptions o) : Service(std::move(o)) {}

 protected:
  RegistryEntry registry_entry() const override {
    auto e = Service::registry_entry();
    e.shard = shard_;
    e.shards = shards_;
    return e;
  }

  void on_start() override {
    shard_ = static_cast<std::uint32_t>(parse_uint(options_.config.option("meta_shard", "0")));
    shards_ = static_cast<std::uint32_t>(parse_uint(options_.config.option("meta_shards", "1")));
    use_xattr_ = options_.config.option("use_xattr") == "true";
    dir_ = data_dir() / "meta";
    fs::create_directories(dir_ / "inodes");
    journal_.open(dir_ / ("shard" + std::to_string(shard_) + ".journal"), std::ios::app);
    if (metadata_shard_of("/", shards_) == shard_) markers_.insert("/");
  }

  void on_stop() override { journal_.flush(); }

  std::vector<std::uint8_t> handle(Opcode op, Decoder& req) override {
    if (op == Opcode::ping) return net::ok_reply();
    const std::string path = normalize_path(req.str());
    std::lock_guard lock(mutex_);
    switch (op) {
      case Opcode::create: return do_create(path, req);
      case Opcode::mkdir: return do_mkdir(path);
      case Opcode::rmdir: return do_rmdir(path);
      case Opcode::unlink: return do_unlink(path);
      case Opcode::stat: return do_stat(path);
      case Opcode::extend_size: return do_extend(path, req.u64());
      case Opcode::readdir: return do_readdir(path);
      case Opcode::dir_mark: {
        if (!owns_dir(path)) return wrong_shard(path);
        if (!markers_.insert(path).second) return fail(Status::exists, path + " exists");
        return net::ok_reply();
      }
      case Opcode::dir_unmark: {
        if (!owns_dir(path)) return wrong_shard(path);
        if (!markers_.count(path)) return fail(Status::not_found, path + " not found");
        if (children_[path] > 0) return fail(Status::not_empty, path + " is not empty");
        markers_.erase(path);
        children_.erase(path);
        return net::ok_reply();
      }
      default:
        return fail(Status::bad_request, "metadata does not handle " + std::string(to_string(op)));
    }
  }

 private:
  bool owns_dir(const std::string& dir) const { return metadata_shard_of(dir, shards_) == shard_; }

  std::vector<std::uint8_t> wrong_shard(const std::string& path) {
    return fail(Status::bad_request, "path " + path + " is not owned by metadata shard " + std::to_string(shard_));
  }

  // Checks that `path` may be added under its parent on this shard.
  std::optional<std::vector<std::uint8_t>> check_new_entry(const std::string& path) {
    if (path == "/") return fail(Status::exists, "/ exists");
    const std::string parent = parent_of(path);
    if (!owns_dir(parent)) return wrong_shard(path);
    if (!markers_.count(parent)) return fail(Status::not_found, "parent " + parent + " missing");
    if (entries_.count(path)) return fail(Status::exists, path + " exists");
    return std::nullopt;
  }

  std::vector<std::uint8_t> do_create(const std::string& path, Decoder& req) {
    const std::uint64_t stripe_size = req.u64();
    const std::uint32_t stripe_count = req.u32();
    std::vector<std::string> targets(req.u32());
    for (auto& t : targets) t = req.str();
    if (auto err = check_new_entry(path)) return *err;
    if (stripe_size == 0) return fail(Status::bad_request, "stripe size must be > 0");
    if (targets.empty()) return fail(Status::unavailable, "no storage targets registered");

    FileMeta meta;
    meta.path = path;
    meta.file_id = (std::uint64_t{shard_ + 1} << 48) | next_file_++;
    meta.stripe = make_stripe_map(path, meta.file_id, stripe_size, std::move(targets), stripe_count);
    entries_[path] = meta;
    ++children_[parent_of(path)];
    persist_inode(meta);
    journal_ << "create " << meta.file_id << " " << path << "\n";
    Encoder enc;
    encode(enc, meta);
    return ok_with(enc);
  }

  std::vector<std::uint8_t> do_mkdir(const std::string& path) {
    if (auto err = check_new_entry(path)) return *err;
    FileMeta meta;
    meta.path = path;
    meta.is_directory = true;
    entries_[path] = meta;
    ++children_[parent_of(path)];
    journal_ << "mkdir " << path << "\n";
    return net::ok_reply();
  }

  std::vector<std::uint8_t> do_rmdir(const std::string& path) {
    auto it = entries_.find(path);
    if (it == entries_.end()) return fail(Status::not_found, path + " not found");
    if (!it->second.is_directory) return fail(Status::not_directory, path + " is not a directory");
    entries_.erase(it);
    --children_[parent_of(path)];
    journal_ << "rmdir " << path << "\n";
    return net::ok_reply();
  }

  std::vector<std::uint8_t> do_unlink(const std::string& path) {
    auto it = entries_.find(path);
    if (it == entries_.end()) return fail(Status::not_found, path + " not found");
    if (it->second.is_directory) return fail(Status::is_directory, path + " is a directory");
    FileMeta meta = std::move(it->second);
    entries_.erase(it);
    --children_[parent_of(path)];
    std::error_code ec;
    fs::remove(inode_path(meta.file_id), ec);
    journal_ << "unlink " << meta.file_id << " " << path << "\n";
    Encoder enc;
    encode(enc, meta);
    return ok_with(enc);
  }

  std::vector<std::uint8_t> do_stat(const std::string& path) {
    Encoder enc;
    if (path == "/") {
      FileMeta root;
      root.path = "/";
      root.is_directory = true;
      encode(enc, root);
      return ok_with(enc);
    }
    auto it = entries_.find(path);
    if (it == entries_.end()) return fail(Status::not_found, path + " not found");
    encode(enc, it->second);
    return ok_with(enc);
  }

  std::vector<std::uint8_t> do_extend(const std::string& path, std::uint64_t end) {
    auto it = entries_.find(path);
    if (it == entries_.end()) return fail(Status::not_found, path + " not found");
    if (it->second.is_directory) return fail(Status::is_directory, path + " is a directory");
    if (end > it->second.size_bytes) {
      it->second.size_bytes = end;
      persist_inode(it->second);
    }
    Encoder enc;
    enc.u64(it->second.size_bytes);
    return ok_with(enc);
  }

  std::vector<std::uint8_t> do_readdir(const std::string& path) {
    if (!owns_dir(path)) return wrong_shard(path);
    if (!markers_.count(path)) return fail(Status::not_found, path + " not found");
    const std::string prefix = path == "/" ? "/" : path + "/";
    std::vector<std::pair<std::string, bool>> names;
    for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
      if (it->first.compare(0, prefix.size(), prefix) != 0) break;
      std::string rest = it->first.substr(prefix.size());
      if (!rest.empty() && rest.find('/') == std::string::npos) {
        names.emplace_back(rest, it->second.is_directory);
      }
    }
    Encoder enc;
    enc.u32(static_cast<std::uint32_t>(names.size()));
    for (const auto& [name, is_dir] : names) enc.str(name).u8(is_dir ? 1 : 0);
    return ok_with(enc);
  }

  fs::path inode_path(std::uint64_t file_id) const { return dir_ / "inodes" / std::to_string(file_id); }

  void persist_inode(const FileMeta& meta) {
    std::ostringstream rec;
    rec << "path=" << meta.path << "\nsize=" << meta.size_bytes
        << "\nstripe_size=" << meta.stripe.stripe_size_bytes
        << "\nstart=" << meta.stripe.start_target_index << "\ntargets=";
    for (std::size_t i = 0; i < meta.stripe.targets.size(); ++i) {
      rec << (i ? "," : "") << meta.stripe.targets[i];
    }
    rec << "\n";
    const std::string record = rec.str();
    const fs::path p = inode_path(meta.file_id);
    int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) return;
    bool stored = false;
    if (use_xattr_) {
      stored = ::fsetxattr(fd, "user.ephemstore.meta", record.data(), record.size(), 0) == 0;
    }
    if (!stored) {
      if (::ftruncate(fd, 0) == 0) {
        [[maybe_unused]] auto n = ::pwrite(fd, record.data(), record.size(), 0);
      }
    }
    ::close(fd);
  }

  std::uint32_t shard_ = 0;
  std::uint32_t shards_ = 1;
  bool use_xattr_ = false;
  fs::path dir_;
  std::ofstream journal_;
  std::mutex mutex_;
  std::uint64_t next_file_ = 1;
  std::set<std::string> markers_;
  std::map<std::string, FileMeta> entries_;
  std::map<std::string, std::size_t> children_;
};

// ---------------------------------------------------------------------------
// Storage target: fixed-size chunks stored as <data_dir>/chunks/<fid>.<k>.

class StorageService final : public Service {
 public:
  explicit StorageService(ServiceOptions o) : Service(std::move(o)) {}

 protected:
  RegistryEntry registry_entry() const override {
    auto e = Service::registry_entry();
    e.id = target_id_;
    return e;
  }

  void on_start() override {
    target_id_ = options_.config.option("target_id", options_.config.id);
    capacity_ = parse_uint(options_.config.option("capacity_bytes", "0"));
    dir_ = data_dir() / "chunks";
    fs::create_directories(dir_);
    for (const auto& entry : fs::directory_iterator(dir_)) {
      const std::string name = entry.path().filename().string();
      auto dot = name.find('.');
      if (dot == std::string::npos || !entry.is_regular_file()) continue;
      try {
        Key k{parse_uint(name.substr(0, dot)), parse_uint(name.substr(dot + 1))};
        chunks_[k] = entry.file_size();
        used_ += entry.file_size();
      } catch (const UsageError&) {
      }
    }
  }

  std::vector<std::uint8_t> handle(Opcode op, Decoder& req) override {
    switch (op) {
      case Opcode::ping: return net::ok_reply();
      case Opcode::write_chunk: {
        Key k{req.u64(), req.u64()};
        const std::uint64_t off = req.u64();
        auto data = req.bytes();
        return do_write(k, off, data);
      }
      case Opcode::read_chunk: {
        Key k{req.u64(), req.u64()};
        const std::uint64_t off = req.u64();
        const std::uint64_t len = req.u64();
        return do_read(k, off, len);
      }
      case Opcode::extend_chunk: {
        Key k{req.u64(), req.u64()};
        return do_extend(k, req.u64());
      }
      case Opcode::drop_file: return do_drop(req.u64());
      case Opcode::sync_file: return do_sync(req.u64());
      case Opcode::target_info: return do_info();
      default:
        return fail(Status::bad_request, "storage does not handle " + std::string(to_string(op)));
    }
  }

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;

  fs::path chunk_path(const Key& k) const { return dir_ / chunk_file_name(k.first, k.second); }

  std::mutex& lock_for(const Key& k) {
    return chunk_locks_[(k.first * 1000003ULL + k.second) % chunk_locks_.size()];
  }

  std::uint64_t length_of(const Key& k) {
    std::lock_guard lock(mutex_);
    auto it = chunks_.find(k);
    return it == chunks_.end() ? 0 : it->second;
  }

  // Reserves capacity for growing chunk k to new_len. False when full.
  bool reserve(const Key& k, std::uint64_t new_len) {
    std::lock_guard lock(mutex_);
    std::uint64_t& cur = chunks_[k];
    if (new_len <= cur) return true;
    const std::uint64_t growth = new_len - cur;
    if (capacity_ != 0 && used_ + growth > capacity_) {
      if (cur == 0) chunks_.erase(k);
      return false;
    }
    used_ += growth;
    cur = new_len;
    return true;
  }

  std::vector<std::uint8_t> no_space() {
    return fail(Status::no_space, "target " + target_id_ + " is full (" + std::to_string(capacity_) + " bytes)");
  }

  std::vector<std::uint8_t> io_fail(const std::string& what) {
    return fail(Status::io_error, "target " + target_id_ + ": " + what + ": " + std::strerror(errno));
  }

  std::vector<std::uint8_t> do_write(const Key& k, std::uint64_t off, std::span<const std::uint8_t> data) {
    std::lock_guard chunk_lock(lock_for(k));
    const std::uint64_t end = off + data.size();
    if (!reserve(k, end)) return no_space();
    int fd = ::open(chunk_path(k).c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) return io_fail("open chunk");
    std::size_t done = 0;
    while (done < data.size()) {
      ssize_t n = ::pwrite(fd, data.data() + done, data.size() - done, static_cast<off_t>(off + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        ::close(fd);
        return io_fail("write chunk");
      }
      done += static_cast<std::size_t>(n);
    }
    ::close(fd);
    Encoder enc;
    enc.u64(length_of(k));
    return ok_with(enc);
  }

  std::vector<std::uint8_t> do_read(const Key& k, std::uint64_t off, std::uint64_t len) {
    std::lock_guard chunk_lock(lock_for(k));
    const std::uint64_t have = length_of(k);
    const std::uint64_t n = off >= have ? 0 : std::min(len, have - off);
    // Reply layout: status, u32 length, bytes.
    std::vector<std::uint8_t> reply(1 + 4 + n);
    reply[0] = static_cast<std::uint8_t>(Status::ok);
    reply[1] = static_cast<std::uint8_t>(n >> 24);
    reply[2] = static_cast<std::uint8_t>(n >> 16);
    reply[3] = static_cast<std::uint8_t>(n >> 8);
    reply[4] = static_cast<std::uint8_t>(n);
    if (n == 0) return reply;
    int fd = ::open(chunk_path(k).c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) return io_fail("open chunk");
    std::uint64_t done = 0;
    while (done < n) {
      ssize_t r = ::pread(fd, reply.data() + 5 + done, n - done, static_cast<off_t>(off + done));
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) break;
      done += static_cast<std::uint64_t>(r);
    }
    ::close(fd);
    // A chunk file shorter than its recorded length reads back as zeros.
    return reply;
  }

  std::vector<std::uint8_t> do_extend(const Key& k, std::uint64_t len) {
    std::lock_guard chunk_lock(lock_for(k));
    const std::uint64_t cur = length_of(k);
    if (len > cur) {
      if (!reserve(k, len)) return no_space();
      int fd = ::open(chunk_path(k).c_str(), O_WRONLY | O_CREAT | O_CLOEXEC, 0644);
      if (fd < 0) return io_fail("open chunk");
      struct stat st{};
      // Growing only: ftruncate never cuts bytes another writer just stored.
      if (::fstat(fd, &st) == 0 && static_cast<std::uint64_t>(st.st_size) < len) {
        if (::ftruncate(fd, static_cast<off_t>(len)) != 0) {
          ::close(fd);
          return io_fail("extend chunk");
        }
      }
      ::close(fd);
    }
    Encoder enc;
    enc.u64(length_of(k));
    return ok_with(enc);
  }

  std::vector<std::uint8_t> do_drop(std::uint64_t file_id) {
    std::vector<Key> keys;
    {
      std::lock_guard lock(mutex_);
      for (auto it = chunks_.lower_bound({file_id, 0}); it != chunks_.end() && it->first.first == file_id; ++it) {
        keys.push_back(it->first);
      }
    }
    std::uint64_t bytes = 0;
    for (const auto& k : keys) {
      std::lock_guard chunk_lock(lock_for(k));
      std::error_code ec;
      fs::remove(chunk_path(k), ec);
      std::lock_guard lock(mutex_);
      auto it = chunks_.find(k);
      if (it != chunks_.end()) {
        bytes += it->second;
        used_ -= it->second;
        chunks_.erase(it);
      }
    }
    Encoder enc;
    enc.u32(static_cast<std::uint32_t>(keys.size())).u64(bytes);
    return ok_with(enc);
  }

  std::vector<std::uint8_t> do_sync(std::uint64_t file_id) {
    std::vector<Key> keys;
    {
      std::lock_guard lock(mutex_);
      for (auto it = chunks_.lower_bound({file_id, 0}); it != chunks_.end() && it->first.first == file_id; ++it) {
        keys.push_back(it->first);
      }
    }
    for (const auto& k : keys) {
      int fd = ::open(chunk_path(k).c_str(), O_RDONLY | O_CLOEXEC);
      if (fd < 0) continue;
      ::fsync(fd);
      ::close(fd);
    }
    return net::ok_reply();
  }

  std::vector<std::uint8_t> do_info() {
    std::lock_guard lock(mutex_);
    Encoder enc;
    enc.str(target_id_).u64(used_).u64(capacity_).u32(static_cast<std::uint32_t>(chunks_.size()));
    for (const auto& [k, len] : chunks_) enc.u64(k.first).u64(k.second).u64(len);
    return ok_with(enc);
  }

  std::string target_id_;
  std::uint64_t capacity_ = 0;
  fs::path dir_;
  std::mutex mutex_;
  std::map<Key, std::uint64_t> chunks_;
  std::uint64_t used_ = 0;
  std::array<std::mutex, 64> chunk_locks_;
};

// ---------------------------------------------------------------------------
// Monitoring: polls the registry and keeps a small log next to management.

class MonitoringService final : public Service {
 public:
  explicit MonitoringService(ServiceOptions o) : Service(std::move(o)) {}
  ~MonitoringService() override { on_stop(); }

 protected:
  void on_start() override {
    dir_ = data_dir() / "mon";
    fs::create_directories(dir_);
    poller_ = std::thread([this] { poll_loop(); });
  }

  void on_stop() override {
    {
      std::lock_guard lock(mutex_);
      done_ = true;
    }
    cv_.notify_all();
    if (poller_.joinable()) poller_.join();
  }

  std::vector<std::uint8_t> handle(Opcode op, Decoder&) override {
    if (op == Opcode::ping) return net::ok_reply();
    if (op != Opcode::monitor_stats) {
      return fail(Status::bad_request, "monitoring does not handle " + std::string(to_string(op)));
    }
    std::lock_guard lock(mutex_);
    Encoder enc;
    enc.u64(polls_).u32(metadata_).u32(storage_);
    return ok_with(enc);
  }

 private:
  void poll_loop() {
    const auto mgmt = management_endpoint(options_.config, options_.realm);
    std::ofstream log(dir_ / "registry.log", std::ios::app);
    std::unique_lock lock(mutex_);
    while (!done_) {
      lock.unlock();
      std::optional<RegistrySnapshot> snap;
      try {
        snap = query_registry(mgmt);
      } catch (const Error&) {
      }
      lock.lock();
      ++polls_;
      if (snap) {
        metadata_ = static_cast<std::uint32_t>(snap->count(ServiceKind::metadata));
        storage_ = static_cast<std::uint32_t>(snap->count(ServiceKind::storage));
        log << "poll " << polls_ << " metadata=" << metadata_ << " storage=" << storage_ << "\n";
      }
      cv_.wait_for(lock, std::chrono::milliseconds(500), [this] { return done_; });
    }
  }

  fs::path dir_;
  std::thread poller_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool done_ = false;
  std::uint64_t polls_ = 0;
  std::uint32_t metadata_ = 0;
  std::uint32_t storage_ = 0;
};

}  // namespace

std::unique_ptr<Service> Service::create(ServiceOptions options) {
  switch (options.config.service) {
    case ServiceKind::management: return std::unique_ptr<Service>(new ManagementService(std::move(options)));
    case ServiceKind::metadata: return std::unique_ptr<Service>(new MetadataService(std::move(options)));
    case ServiceKind::storage: return std::unique_ptr<Service>(new StorageService(std::move(options)));
    case ServiceKind::monitoring: return std::unique_ptr<Service>(new MonitoringService(std::move(options)));
    case ServiceKind::client: break;
  }
  throw UsageError("a client configuration does not describe a daemon");
}

}  // namespace ephemstore::ministore
