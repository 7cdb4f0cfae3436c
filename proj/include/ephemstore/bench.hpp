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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ephemstore/fs.hpp"
#include "ephemstore/inventory.hpp"
#include "ephemstore/units.hpp"

namespace ephemstore::bench {

enum class Workload { ior, mdtest, hacc };
enum class Mode { shared_file, file_per_process };

std::string_view to_string(Workload w);
std::string_view to_string(Mode m);
Workload workload_from_string(std::string_view text);
Mode mode_from_string(std::string_view text);

struct BenchSpec {
  Workload workload = Workload::ior;
  std::uint32_t nodes = 1;
  std::uint32_t ppn = 1;
  std::uint64_t size_per_proc_bytes = 0;     // ior
  std::uint64_t transfer_size_bytes = kMiB;  // ior, hacc
  Mode mode = Mode::shared_file;
  std::uint64_t particles_per_proc = 0;  // hacc
  std::uint64_t items_per_proc = 1000;   // mdtest
  std::uint64_t mdtest_file_bytes = 0;   // mdtest: bytes written per file
  std::uint32_t iterations = 10;
  bool reorder_read_ranks = true;
  bool fsync = true;
  bool keep_files = false;  // leave the last iteration's files in place
  std::uint64_t seed = 0x5eed;
  std::string directory = "/";  // namespace directory holding the run

  std::size_t workers() const { return std::size_t{nodes} * ppn; }
  // Throws UsageError.
  void validate() const;
};

struct PhaseSample {
  std::uint64_t bytes = 0;
  double seconds = 0;    // max across workers
  double bandwidth = 0;  // bytes / seconds, 0 when no bytes moved
};

struct IterationResult {
  PhaseSample write;
  PhaseSample read;
};

enum class MdTarget { directory, file, tree };
std::string_view to_string(MdTarget t);

struct OpsRow {
  MdTarget target = MdTarget::directory;
  std::string operation;  // creation, stat, read, removal
  std::uint64_t count = 0;
  double seconds = 0;
  double ops_per_sec = 0;
};

struct BenchResult {
  BenchSpec spec;
  double write_bw = 0;  // all iterations: bytes / summed phase time
  double read_bw = 0;
  std::vector<IterationResult> per_iteration;
  std::vector<OpsRow> ops_table;                   // mdtest, summed over iterations
  std::vector<std::vector<OpsRow>> ops_per_iteration;
  std::map<std::string, double> elapsed;           // phase -> seconds, summed
  std::uint64_t file_size_bytes = 0;               // data file(s) of the last iteration
};

struct Summary {
  double min = 0;
  double median = 0;
  double max = 0;
};
Summary summarize(std::vector<double> values);

// Each of nodes*ppn workers writes size_per_proc bytes in transfer-sized
// blocks, then every byte is read back and verified.
BenchResult run_ior(const BenchSpec& spec, const vfs::FileSystemFactory& attach);
// Directory, file and tree operations in private per-worker subtrees.
BenchResult run_mdtest(const BenchSpec& spec, const vfs::FileSystemFactory& attach);
// Array-of-structures particle records in one shared file.
BenchResult run_hacc(const BenchSpec& spec, const vfs::FileSystemFactory& attach);
BenchResult run(const BenchSpec& spec, const vfs::FileSystemFactory& attach);

// Deterministic data pattern keyed by (seed, logical byte offset).
void fill_pattern(std::uint64_t seed, std::uint64_t offset, std::span<std::uint8_t> out);
std::optional<std::uint64_t> first_mismatch(std::uint64_t seed, std::uint64_t offset,
                                            std::span<const std::uint8_t> data);

// One HACC particle: seven 4-byte reals, an 8-byte id and a 2-byte mask,
// serialized little-endian in declaration order.
struct Particle {
  static constexpr std::size_t kSize = 38;

  float xx = 0, yy = 0, zz = 0;
  float vx = 0, vy = 0, vz = 0;
  float phi = 0;
  std::int64_t pid = 0;
  std::uint16_t mask = 0;

  void serialize(std::span<std::uint8_t, kSize> out) const;
  static Particle deserialize(std::span<const std::uint8_t, kSize> in);
  bool operator==(const Particle&) const = default;
};

Particle make_particle(std::uint64_t seed, std::uint64_t rank, std::uint64_t index);
std::vector<std::uint8_t> serialize_particles(std::uint64_t seed, std::uint64_t rank, std::uint64_t count);

struct CacheFitReport {
  std::uint64_t per_node_volume_bytes = 0;
  std::uint64_t dram_bytes = 0;
  bool fits = true;
};

// Data each storage node manages when compute_nodes*ppn processes each move
// size_per_proc bytes over storage_nodes nodes. Throws UsageError when
// storage_nodes is 0.
CacheFitReport predict_per_node_volume(std::uint64_t compute_nodes, std::uint64_t ppn,
                                       std::uint64_t size_per_proc, std::uint64_t storage_nodes,
                                       std::uint64_t dram_bytes);

// Sum of nominal bandwidths (bytes/s). Throws UsageError on an empty list.
std::uint64_t aggregate_peak_bw(std::span<const inventory::DiskSpec> disks);
std::uint64_t aggregate_peak_read_bw(std::span<const inventory::DiskSpec> disks);

inline constexpr const char* kResultsCsvHeader =
    "workload,mode,nodes,ppn,size_per_proc,iteration,phase,bytes,seconds,bandwidth_bytes_per_s";
inline constexpr const char* kMdtestCsvHeader = "workload,iteration,target,operation,count,seconds,ops_per_s";

void write_results_csv(std::ostream& out, const BenchResult& result, bool header = true);
void write_mdtest_csv(std::ostream& out, const BenchResult& result, bool header = true);
void write_summary(std::ostream& out, const BenchResult& result);

}  // namespace ephemstore::bench
