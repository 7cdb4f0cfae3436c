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

#include <algorithm>

#include "bench_internal.hpp"
#include "ephemstore/error.hpp"

namespace ephemstore::bench {

namespace detail {

void finalize_bandwidth(BenchResult& result) {
  std::uint64_t wbytes = 0, rbytes = 0;
  double wsec = 0, rsec = 0;
  for (const auto& it : result.per_iteration) {
    wbytes += it.write.bytes;
    rbytes += it.read.bytes;
    wsec += it.write.seconds;
    rsec += it.read.seconds;
  }
  result.elapsed["write"] = wsec;
  result.elapsed["read"] = rsec;
  result.write_bw = (wbytes == 0 || wsec <= 0) ? 0.0 : static_cast<double>(wbytes) / wsec;
  result.read_bw = (rbytes == 0 || rsec <= 0) ? 0.0 : static_cast<double>(rbytes) / rsec;
}

void ensure_directory(const vfs::FileSystemFactory& attach, const std::string& dir) {
  if (dir.empty() || dir == "/") return;
  auto fs = attach(0);
  std::string path;
  std::size_t pos = 1;
  while (pos <= dir.size()) {
    const auto next = std::min(dir.find('/', pos), dir.size());
    path = dir.substr(0, next);
    if (!fs->exists(path)) fs->mkdir(path);
    pos = next + 1;
  }
}

}  // namespace detail

namespace {

using detail::join_path;

std::uint64_t iteration_seed(const BenchSpec& spec, std::uint32_t iter) {
  return spec.seed * 0x9e3779b97f4a7c15ULL + iter + 1;
}

}  // namespace

BenchResult run_ior(const BenchSpec& spec, const vfs::FileSystemFactory& attach) {
  spec.validate();
  if (spec.workload != Workload::ior) throw UsageError("run_ior needs an ior spec");
  detail::ensure_directory(attach, spec.directory);

  const std::size_t workers = spec.workers();
  const std::uint64_t per_proc = spec.size_per_proc_bytes;
  const std::uint64_t xfer = spec.transfer_size_bytes;
  const bool shared = spec.mode == Mode::shared_file;
  // Readers shift by one node's worth of ranks so no worker reads data its
  // own node wrote (defeats client-side caching). Needs more than one node.
  const std::size_t shift = (spec.reorder_read_ranks && spec.nodes > 1) ? spec.ppn : 0;

  auto file_of = [&](std::size_t rank) {
    return shared ? join_path(spec.directory, "ior.shared")
                  : join_path(spec.directory, "ior.fpp." + std::to_string(rank));
  };
  // Offset of a rank's region inside its file.
  auto base_of = [&](std::size_t rank) { return shared ? rank * per_proc : 0; };

  BenchResult result;
  result.spec = spec;
  result.per_iteration.resize(spec.iterations);
  std::vector<std::vector<double>> write_t(spec.iterations, std::vector<double>(workers));
  std::vector<std::vector<double>> read_t(spec.iterations, std::vector<double>(workers));
  std::vector<std::uint64_t> sizes(spec.iterations);

  detail::Team team(workers);
  team.run(attach, [&](std::size_t rank, vfs::FileSystem& fs) {
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(std::min(xfer, std::max<std::uint64_t>(per_proc, 1))));
    for (std::uint32_t iter = 0; iter < spec.iterations; ++iter) {
      const std::uint64_t seed = iteration_seed(spec, iter);

      team.single(rank, [&] {
        if (shared) fs.create(file_of(0));
      });

      write_t[iter][rank] = team.timed([&] {
        auto file = shared ? fs.open(file_of(rank)) : fs.create(file_of(rank));
        const std::uint64_t base = base_of(rank);
        for (std::uint64_t off = 0; off < per_proc; off += xfer) {
          const auto n = static_cast<std::size_t>(std::min(xfer, per_proc - off));
          std::span<std::uint8_t> block(buf.data(), n);
          // The pattern is keyed by the rank's logical offset so both modes
          // produce the same byte stream.
          fill_pattern(seed, rank * per_proc + off, block);
          file->write_at(base + off, block);
        }
        if (spec.fsync) file->sync();
      });

      const std::size_t source = (rank + shift) % workers;
      double verify_seconds = 0;
      read_t[iter][rank] = team.timed([&] {
        auto file = fs.open(file_of(source));
        const std::uint64_t base = base_of(source);
        for (std::uint64_t off = 0; off < per_proc; off += xfer) {
          const auto n = static_cast<std::size_t>(std::min(xfer, per_proc - off));
          std::span<std::uint8_t> block(buf.data(), n);
          const std::size_t got = file->read_at(base + off, block);
          const auto v0 = detail::Clock::now();
          if (got != n) throw VerificationError(file_of(source), base + off + got);
          if (auto bad = first_mismatch(seed, source * per_proc + off, block)) {
            throw VerificationError(file_of(source), base + (*bad - source * per_proc));
          }
          verify_seconds += std::chrono::duration<double>(detail::Clock::now() - v0).count();
        }
      });
      read_t[iter][rank] = std::max(0.0, read_t[iter][rank] - verify_seconds);

      team.step([&] {
        if (rank == 0) sizes[iter] = fs.stat(file_of(0)).size_bytes;
      });
      if (spec.keep_files && iter + 1 == spec.iterations) continue;
      team.step([&] {
        if (!shared) fs.unlink(file_of(rank));
        else if (rank == 0) fs.unlink(file_of(0));
      });
    }
  });

  const std::uint64_t total = per_proc * workers;
  for (std::uint32_t i = 0; i < spec.iterations; ++i) {
    result.per_iteration[i].write = detail::make_sample(total, write_t[i]);
    result.per_iteration[i].read = detail::make_sample(total, read_t[i]);
  }
  result.file_size_bytes = sizes.back();
  detail::finalize_bandwidth(result);
  return result;
}

}  // namespace ephemstore::bench
