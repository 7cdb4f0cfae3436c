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

#include <array>

#include "bench_internal.hpp"
#include "ephemstore/error.hpp"

namespace ephemstore::bench {

namespace {

using detail::join_path;

// Reporting order of the operations table.
struct RowDef {
  MdTarget target;
  const char* operation;
};
constexpr std::array<RowDef, 9> kRows = {{
    {MdTarget::directory, "creation"},
    {MdTarget::directory, "stat"},
    {MdTarget::directory, "removal"},
    {MdTarget::file, "creation"},
    {MdTarget::file, "stat"},
    {MdTarget::file, "read"},
    {MdTarget::file, "removal"},
    {MdTarget::tree, "creation"},
    {MdTarget::tree, "removal"},
}};

enum Row : std::size_t {
  dir_create, dir_stat, dir_remove, file_create, file_stat, file_read, file_remove, tree_create, tree_remove
};

}  // namespace

BenchResult run_mdtest(const BenchSpec& spec, const vfs::FileSystemFactory& attach) {
  spec.validate();
  if (spec.workload != Workload::mdtest) throw UsageError("run_mdtest needs an mdtest spec");
  detail::ensure_directory(attach, spec.directory);

  const std::size_t workers = spec.workers();
  const std::uint64_t items = spec.items_per_proc;
  const std::string root = join_path(spec.directory, "mdtest");

  {
    auto fs = attach(0);
    if (fs->exists(root)) {
      throw StateError("namespace residue: " + root + " exists from a previous run; remove it first");
    }
  }

  // seconds[iter][row][worker]
  std::vector<std::array<std::vector<double>, kRows.size()>> seconds(spec.iterations);
  for (auto& it : seconds) {
    for (auto& row : it) row.assign(workers, 0.0);
  }

  detail::Team team(workers);
  team.run(attach, [&](std::size_t rank, vfs::FileSystem& fs) {
    const std::string tree = join_path(root, "tree." + std::to_string(rank));
    auto dir_of = [&](std::uint64_t i) { return join_path(tree, "dir." + std::to_string(i)); };
    auto file_of = [&](std::uint64_t i) { return join_path(tree, "file." + std::to_string(i)); };
    std::vector<std::uint8_t> payload(spec.mdtest_file_bytes);
    std::vector<std::uint8_t> readback(spec.mdtest_file_bytes);
    fill_pattern(spec.seed, rank * payload.size(), payload);

    for (std::uint32_t iter = 0; iter < spec.iterations; ++iter) {
      auto& t = seconds[iter];
      team.single(rank, [&] { fs.mkdir(root); });

      t[tree_create][rank] = team.timed([&] { fs.mkdir(tree); });
      t[dir_create][rank] = team.timed([&] {
        for (std::uint64_t i = 0; i < items; ++i) fs.mkdir(dir_of(i));
      });
      t[dir_stat][rank] = team.timed([&] {
        for (std::uint64_t i = 0; i < items; ++i) {
          if (!fs.stat(dir_of(i)).is_directory) throw NotADirectory(dir_of(i));
        }
      });
      t[dir_remove][rank] = team.timed([&] {
        for (std::uint64_t i = 0; i < items; ++i) fs.rmdir(dir_of(i));
      });
      t[file_create][rank] = team.timed([&] {
        for (std::uint64_t i = 0; i < items; ++i) {
          auto f = fs.create(file_of(i));
          if (!payload.empty()) f->write_at(0, payload);
        }
      });
      t[file_stat][rank] = team.timed([&] {
        for (std::uint64_t i = 0; i < items; ++i) {
          if (fs.stat(file_of(i)).size_bytes != payload.size()) {
            throw VerificationError(file_of(i), fs.stat(file_of(i)).size_bytes);
          }
        }
      });
      t[file_read][rank] = team.timed([&] {
        for (std::uint64_t i = 0; i < items; ++i) {
          auto f = fs.open(file_of(i));
          const std::size_t got = f->read_at(0, readback);
          if (got != payload.size()) throw VerificationError(file_of(i), got);
          if (readback != payload) throw VerificationError(file_of(i), 0);
        }
      });
      t[file_remove][rank] = team.timed([&] {
        for (std::uint64_t i = 0; i < items; ++i) fs.unlink(file_of(i));
      });
      t[tree_remove][rank] = team.timed([&] { fs.rmdir(tree); });
      team.single(rank, [&] { fs.rmdir(root); });
    }
  });

  BenchResult result;
  result.spec = spec;
  result.ops_table.resize(kRows.size());
  for (std::size_t r = 0; r < kRows.size(); ++r) {
    result.ops_table[r].target = kRows[r].target;
    result.ops_table[r].operation = kRows[r].operation;
  }
  for (std::uint32_t iter = 0; iter < spec.iterations; ++iter) {
    std::vector<OpsRow> rows;
    for (std::size_t r = 0; r < kRows.size(); ++r) {
      OpsRow row;
      row.target = kRows[r].target;
      row.operation = kRows[r].operation;
      const bool is_tree = row.target == MdTarget::tree;
      row.count = is_tree ? workers : workers * items;
      for (double s : seconds[iter][r]) row.seconds = std::max(row.seconds, s);
      row.ops_per_sec = (row.count == 0 || row.seconds <= 0) ? 0.0 : static_cast<double>(row.count) / row.seconds;
      auto& total = result.ops_table[r];
      total.count += row.count;
      total.seconds += row.seconds;
      rows.push_back(row);
    }
    result.ops_per_iteration.push_back(std::move(rows));
  }
  for (auto& total : result.ops_table) {
    total.ops_per_sec = (total.count == 0 || total.seconds <= 0) ? 0.0 : static_cast<double>(total.count) / total.seconds;
    result.elapsed[std::string(to_string(total.target)) + "_" + total.operation] = total.seconds;
  }
  return result;
}

}  // namespace ephemstore::bench
