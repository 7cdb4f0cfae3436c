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

#include <limits>

#include "ephemstore/bench.hpp"
#include "ephemstore/error.hpp"

namespace ephemstore::bench {

CacheFitReport predict_per_node_volume(std::uint64_t compute_nodes, std::uint64_t ppn,
                                       std::uint64_t size_per_proc, std::uint64_t storage_nodes,
                                       std::uint64_t dram_bytes) {
  if (storage_nodes == 0) throw UsageError("storage_nodes must be >= 1");
  __extension__ typedef unsigned __int128 u128;
  const u128 total = u128{compute_nodes} * ppn * size_per_proc;
  // Balanced load; the busiest node takes the rounding remainder.
  const u128 per_node = (total + storage_nodes - 1) / storage_nodes;
  if (per_node > std::numeric_limits<std::uint64_t>::max()) throw UsageError("per-node volume overflows");
  CacheFitReport r;
  r.per_node_volume_bytes = static_cast<std::uint64_t>(per_node);
  r.dram_bytes = dram_bytes;
  r.fits = r.per_node_volume_bytes <= dram_bytes;
  return r;
}

namespace {

template <class Field>
std::uint64_t sum_bw(std::span<const inventory::DiskSpec> disks, Field field) {
  if (disks.empty()) throw UsageError("aggregate bandwidth needs at least one disk");
  std::uint64_t total = 0;
  for (const auto& d : disks) total += d.*field;
  return total;
}

}  // namespace

std::uint64_t aggregate_peak_bw(std::span<const inventory::DiskSpec> disks) {
  return sum_bw(disks, &inventory::DiskSpec::nominal_write_bw);
}

std::uint64_t aggregate_peak_read_bw(std::span<const inventory::DiskSpec> disks) {
  return sum_bw(disks, &inventory::DiskSpec::nominal_read_bw);
}

}  // namespace ephemstore::bench
