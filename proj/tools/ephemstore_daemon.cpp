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

// One ministore service process, launched by the local executor backend.

#include <signal.h>

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ephemstore/error.hpp"
#include "ephemstore/planner.hpp"
#include "ephemstore/services.hpp"

namespace {

std::atomic<ephemstore::ministore::Service*> g_service{nullptr};

void on_signal(int) {
  if (auto* s = g_service.load()) s->request_stop();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ephemstore;
  CLI::App app{"ephemstore service daemon"};
  std::string config_path, data_dir, working_root, realm;
  app.add_option("--config", config_path, "rendered service configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--data-dir", data_dir, "directory standing in for the service's disk")->required();
  app.add_option("--working-root", working_root, "deployment working root")->required();
  app.add_option("--realm", realm, "endpoint realm (default: derived from the working root)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    ministore::ServiceOptions opts;
    opts.config = planner::parse_config(buf.str());
    opts.data_dir = data_dir;
    opts.realm = realm.empty() ? net::realm_for(working_root) : realm;

    auto service = ministore::Service::create(std::move(opts));
    g_service.store(service.get());
    struct sigaction sa{};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGTERM, &sa, nullptr);
    sigaction(SIGINT, &sa, nullptr);
    signal(SIGPIPE, SIG_IGN);

    service->start();
    std::cout << service->options().config.id << " listening on " << service->endpoint().to_string() << std::endl;
    service->run();
    g_service.store(nullptr);
    std::cout << service->options().config.id << " stopped" << std::endl;
  } catch (const std::exception& e) {
    std::cerr << "startup failed: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
