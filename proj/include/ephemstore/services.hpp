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

#include <atomic>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "ephemstore/planner.hpp"
#include "ephemstore/registry.hpp"
#include "ephemstore/socket.hpp"

namespace ephemstore::ministore {

struct ServiceOptions {
  planner::ServiceConfig config;
  // Where the service keeps its data. The planned data_dir is a mount point
  // on the target node; a local deployment relocates it under its root.
  std::filesystem::path data_dir;
  std::string realm;
};

// Endpoint of a planned service (or of the management service it names).
net::Endpoint service_endpoint(const planner::ServiceConfig& config, const std::string& realm);
net::Endpoint management_endpoint(const planner::ServiceConfig& config, const std::string& realm);

// A ministore daemon: binds its endpoint, registers with management, then
// serves one thread per client connection until stopped.
class Service {
 public:
  virtual ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Dispatches on config.service. Client configs are rejected.
  static std::unique_ptr<Service> create(ServiceOptions options);

  // Prepares the data directory, binds and registers. Throws on failure
  // (read-only data dir, PortCollision, duplicate registration, ...).
  void start();
  // Blocks serving requests until request_stop() or a shutdown frame.
  void run();
  // Safe from any thread and from signal-driven loops.
  void request_stop() { stop_.store(true); }
  bool stopping() const { return stop_.load(); }

  const ServiceOptions& options() const { return options_; }
  const net::Endpoint& endpoint() const { return endpoint_; }

 protected:
  explicit Service(ServiceOptions options);

  // Payload of the reply frame (status byte first).
  virtual std::vector<std::uint8_t> handle(wire::Opcode op, wire::Decoder& request) = 0;
  virtual void on_start() {}
  virtual void on_stop() {}
  virtual bool registers() const { return true; }
  virtual RegistryEntry registry_entry() const;

  const std::filesystem::path& data_dir() const { return options_.data_dir; }
  ServiceOptions options_;
  net::Endpoint endpoint_;

 private:
  void serve_connection(int fd);

  std::atomic<bool> stop_{false};
  net::Fd listener_;
  std::mutex conn_mutex_;
  std::list<int> conn_fds_;
  std::vector<std::thread> conn_threads_;
};

// Rejects a data directory that is missing write permission or sits on a
// read-only mount; creates it if absent.
void prepare_data_dir(const std::filesystem::path& dir);

}  // namespace ephemstore::ministore
