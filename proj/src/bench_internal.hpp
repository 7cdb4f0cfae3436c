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
#include <barrier>
#include <chrono>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "ephemstore/bench.hpp"

namespace ephemstore::bench::detail {

using Clock = std::chrono::steady_clock;

// Lock-step execution of one benchmark: every worker passes every barrier,
// even after a failure elsewhere, so a failing worker cannot strand the
// others. The first error is rethrown by run().
class Team {
 public:
  explicit Team(std::size_t workers) : workers_(workers), barrier_(static_cast<std::ptrdiff_t>(workers)) {}

  // Runs `body(worker, fs)` on one thread per worker.
  void run(const vfs::FileSystemFactory& attach,
           const std::function<void(std::size_t, vfs::FileSystem&)>& body) {
    std::vector<std::thread> threads;
    threads.reserve(workers_);
    for (std::size_t w = 0; w < workers_; ++w) {
      threads.emplace_back([&, w] {
        std::unique_ptr<vfs::FileSystem> fs;
        guard([&] { fs = attach(w); });
        if (!fs) {
          // Keep the barrier count balanced until everyone notices.
          failed_only_loop();
          return;
        }
        body(w, *fs);
      });
    }
    for (auto& t : threads) t.join();
    if (error_) std::rethrow_exception(error_);
  }

  // Barrier, then `work` timed on this worker. Returns seconds (0 if skipped).
  template <class F>
  double timed(F&& work) {
    sync();
    if (failed_.load()) return 0;
    const auto t0 = Clock::now();
    guard(work);
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }

  // Barrier, then untimed `work`.
  template <class F>
  void step(F&& work) {
    sync();
    if (!failed_.load()) guard(work);
  }

  // Barrier, then `work` on worker 0 only.
  template <class F>
  void single(std::size_t worker, F&& work) {
    sync();
    if (worker == 0 && !failed_.load()) guard(work);
  }

  void sync() { barrier_.arrive_and_wait(); }

  bool failed() const { return failed_.load(); }

 private:
  template <class F>
  void guard(F&& work) {
    try {
      work();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      failed_.store(true);
    }
  }

  void failed_only_loop() {
    failed_.store(true);
    barrier_.arrive_and_drop();
  }

  std::size_t workers_;
  std::barrier<> barrier_;
  std::atomic<bool> failed_{false};
  std::mutex mutex_;
  std::exception_ptr error_;
};

inline PhaseSample make_sample(std::uint64_t bytes, const std::vector<double>& per_worker) {
  PhaseSample s;
  s.bytes = bytes;
  for (double t : per_worker) s.seconds = std::max(s.seconds, t);
  s.bandwidth = (bytes == 0 || s.seconds <= 0) ? 0.0 : static_cast<double>(bytes) / s.seconds;
  return s;
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (dir == "/" || dir.empty()) ? "/" + name : dir + "/" + name;
}

void finalize_bandwidth(BenchResult& result);

// Creates the run directory and any missing parents.
void ensure_directory(const vfs::FileSystemFactory& attach, const std::string& dir);

}  // namespace ephemstore::bench::detail
