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
#include <bit>
#include <cstring>

#include "bench_internal.hpp"
#include "ephemstore/error.hpp"

namespace ephemstore::bench {

std::string_view to_string(Workload w) {
  switch (w) {
    case Workload::ior: return "ior";
    case Workload::mdtest: return "mdtest";
    case Workload::hacc: return "hacc";
  }
  return "?";
}

std::string_view to_string(Mode m) { return m == Mode::shared_file ? "shared" : "fpp"; }

std::string_view to_string(MdTarget t) {
  switch (t) {
    case MdTarget::directory: return "directory";
    case MdTarget::file: return "file";
    case MdTarget::tree: return "tree";
  }
  return "?";
}

Workload workload_from_string(std::string_view text) {
  for (auto w : {Workload::ior, Workload::mdtest, Workload::hacc}) {
    if (to_string(w) == text) return w;
  }
  throw UsageError("unknown workload '" + std::string(text) + "'");
}

Mode mode_from_string(std::string_view text) {
  if (text == "shared" || text == "shared_file") return Mode::shared_file;
  if (text == "fpp" || text == "file_per_process") return Mode::file_per_process;
  throw UsageError("unknown mode '" + std::string(text) + "' (shared or fpp)");
}

void BenchSpec::validate() const {
  if (workers() < 1) throw UsageError("nodes * ppn must be >= 1");
  if (iterations < 1) throw UsageError("iterations must be >= 1");
  if (workload == Workload::ior) {
    if (transfer_size_bytes == 0) throw UsageError("transfer size must be > 0");
    if (size_per_proc_bytes % transfer_size_bytes != 0) {
      throw UsageError("transfer size must divide the per-process size");
    }
  }
  if (workload == Workload::hacc && transfer_size_bytes == 0) throw UsageError("transfer size must be > 0");
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  return s;
}

BenchResult run(const BenchSpec& spec, const vfs::FileSystemFactory& attach) {
  switch (spec.workload) {
    case Workload::ior: return run_ior(spec, attach);
    case Workload::mdtest: return run_mdtest(spec, attach);
    case Workload::hacc: return run_hacc(spec, attach);
  }
  throw UsageError("unknown workload");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint8_t pattern_byte(std::uint64_t seed, std::uint64_t offset) {
  return static_cast<std::uint8_t>(splitmix64(seed ^ (offset >> 3) * 0x2545f4914f6cdd1dULL) >> (8 * (offset & 7)));
}

}  // namespace

void fill_pattern(std::uint64_t seed, std::uint64_t offset, std::span<std::uint8_t> out) {
  std::size_t i = 0;
  // Unaligned head, whole words, tail.
  while (i < out.size() && ((offset + i) & 7) != 0) {
    out[i] = pattern_byte(seed, offset + i);
    ++i;
  }
  while (i + 8 <= out.size()) {
    std::uint64_t word = splitmix64(seed ^ ((offset + i) >> 3) * 0x2545f4914f6cdd1dULL);
    for (int b = 0; b < 8; ++b) out[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
    i += 8;
  }
  while (i < out.size()) {
    out[i] = pattern_byte(seed, offset + i);
    ++i;
  }
}

std::optional<std::uint64_t> first_mismatch(std::uint64_t seed, std::uint64_t offset,
                                            std::span<const std::uint8_t> data) {
  std::vector<std::uint8_t> expect(std::min<std::size_t>(data.size(), 1 << 20));
  for (std::size_t done = 0; done < data.size(); done += expect.size()) {
    const std::size_t n = std::min(expect.size(), data.size() - done);
    std::span<std::uint8_t> window(expect.data(), n);
    fill_pattern(seed, offset + done, window);
    if (std::memcmp(window.data(), data.data() + done, n) != 0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (window[i] != data[done + i]) return offset + done + i;
      }
    }
  }
  return std::nullopt;
}

namespace {

template <class T>
void put_le(std::uint8_t* out, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out[i] = static_cast<std::uint8_t>(bits >> (8 * i));
}

template <class T>
T get_le(const std::uint8_t* in) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(U{in[i]} << (8 * i));
  return std::bit_cast<T>(bits);
}

}  // namespace

void Particle::serialize(std::span<std::uint8_t, kSize> out) const {
  std::uint8_t* p = out.data();
  for (float f : {xx, yy, zz, vx, vy, vz, phi}) {
    put_le(p, f);
    p += 4;
  }
  put_le(p, pid);
  p += 8;
  put_le(p, mask);
}

Particle Particle::deserialize(std::span<const std::uint8_t, kSize> in) {
  const std::uint8_t* p = in.data();
  Particle q;
  for (float* f : {&q.xx, &q.yy, &q.zz, &q.vx, &q.vy, &q.vz, &q.phi}) {
    *f = get_le<float>(p);
    p += 4;
  }
  q.pid = get_le<std::int64_t>(p);
  p += 8;
  q.mask = get_le<std::uint16_t>(p);
  return q;
}

Particle make_particle(std::uint64_t seed, std::uint64_t rank, std::uint64_t index) {
  std::uint64_t state = splitmix64(seed ^ (rank << 40) ^ index);
  auto unit = [&] {
    state = splitmix64(state);
    return static_cast<float>(state >> 40) / static_cast<float>(1ULL << 24);
  };
  Particle p;
  p.xx = unit() * 256.0f;
  p.yy = unit() * 256.0f;
  p.zz = unit() * 256.0f;
  p.vx = unit() * 2.0f - 1.0f;
  p.vy = unit() * 2.0f - 1.0f;
  p.vz = unit() * 2.0f - 1.0f;
  p.phi = unit() * -10.0f;
  p.pid = static_cast<std::int64_t>((rank << 40) | index);
  p.mask = static_cast<std::uint16_t>(splitmix64(state) & 0xffff);
  return p;
}

std::vector<std::uint8_t> serialize_particles(std::uint64_t seed, std::uint64_t rank, std::uint64_t count) {
  std::vector<std::uint8_t> out(count * Particle::kSize);
  for (std::uint64_t i = 0; i < count; ++i) {
    make_particle(seed, rank, i).serialize(std::span<std::uint8_t, Particle::kSize>(out.data() + i * Particle::kSize, Particle::kSize));
  }
  return out;
}

}  // namespace ephemstore::bench
