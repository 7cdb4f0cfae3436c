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
#include <cstring>

#include "bench_internal.hpp"
#include "ephemstore/error.hpp"

namespace ephemstore::bench {

BenchResult run_hacc(const BenchSpec& spec, const vfs::FileSystemFactory& attach) {
  spec.validate();
  if (spec.workload != Workload::hacc) throw UsageError("run_hacc needs a hacc spec");
  detail::ensure_directory(attach, spec.directory);

  const std::size_t workers = spec.workers();
  const std::uint64_t n = spec.particles_per_proc;
  const std::uint64_t region = n * Particle::kSize;
  const std::uint64_t xfer = spec.transfer_size_bytes;
  const std::string path = detail::join_path(spec.directory, "hacc.shared");
  const std::size_t shift = (spec.reorder_read_ranks && spec.nodes > 1) ? spec.ppn : 0;

  BenchResult result;
  result.spec = spec;
  result.spec.size_per_proc_bytes = region;
  result.per_iteration.resize(spec.iterations);
  std::vector<std::vector<double>> write_t(spec.iterations, std::vector<double>(workers));
  std::vector<std::vector<double>> read_t(spec.iterations, std::vector<double>(workers));
  std::vector<std::uint64_t> sizes(spec.iterations);

  detail::Team team(workers);
  team.run(attach, [&](std::size_t rank, vfs::FileSystem& fs) {
    std::vector<std::uint8_t> readback(region);
    for (std::uint32_t iter = 0; iter < spec.iterations; ++iter) {
      const std::uint64_t seed = spec.seed + iter;
      // Records are built before the clock starts, as the kernel fills its
      // particle arrays before calling into I/O.
      const std::vector<std::uint8_t> records = serialize_particles(seed, rank, n);

      team.single(rank, [&] { fs.create(path); });

      write_t[iter][rank] = team.timed([&] {
        auto file = fs.open(path);
        const std::uint64_t base = rank * region;
        for (std::uint64_t off = 0; off < region; off += xfer) {
          const auto len = static_cast<std::size_t>(std::min(xfer, region - off));
          file->write_at(base + off, std::span<const std::uint8_t>(records.data() + off, len));
        }
        if (spec.fsync) file->sync();
      });

      const std::size_t source = (rank + shift) % workers;
      read_t[iter][rank] = team.timed([&] {
        auto file = fs.open(path);
        const std::uint64_t base = source * region;
        for (std::uint64_t off = 0; off < region; off += xfer) {
          const auto len = static_cast<std::size_t>(std::min(xfer, region - off));
          const std::size_t got = file->read_at(base + off, std::span<std::uint8_t>(readback.data() + off, len));
          if (got != len) throw VerificationError(path, base + off + got);
        }
      });

      team.step([&] {
        // Field-level check of every record against the generator.
        for (std::uint64_t i = 0; i < n; ++i) {
          const std::uint8_t* rec = readback.data() + i * Particle::kSize;
          const Particle got = Particle::deserialize(std::span<const std::uint8_t, Particle::kSize>(rec, Particle::kSize));
          const Particle want = make_particle(seed, source, i);
          if (got == want) continue;
          std::array<std::uint8_t, Particle::kSize> ref{};
          want.serialize(ref);
          std::size_t b = 0;
          while (b < Particle::kSize && ref[b] == rec[b]) ++b;
          throw VerificationError(path, source * region + i * Particle::kSize + b);
        }
      });

      team.step([&] {
        if (rank != 0) return;
        sizes[iter] = fs.stat(path).size_bytes;
        if (sizes[iter] != region * workers) {
          throw VerificationError(path, std::min(sizes[iter], region * workers));
        }
      });
      if (spec.keep_files && iter + 1 == spec.iterations) continue;
      team.single(rank, [&] { fs.unlink(path); });
    }
  });

  const std::uint64_t total = region * workers;
  for (std::uint32_t i = 0; i < spec.iterations; ++i) {
    result.per_iteration[i].write = detail::make_sample(total, write_t[i]);
    result.per_iteration[i].read = detail::make_sample(total, read_t[i]);
  }
  result.file_size_bytes = sizes.back();
  detail::finalize_bandwidth(result);
  return result;
}

}  // namespace ephemstore::bench
