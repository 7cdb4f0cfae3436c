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

#include <iomanip>

#include "ephemstore/bench.hpp"

namespace ephemstore::bench {

namespace {

std::string fmt_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

void write_results_csv(std::ostream& out, const BenchResult& r, bool header) {
  if (header) out << kResultsCsvHeader << "\n";
  const auto& s = r.spec;
  for (std::size_t i = 0; i < r.per_iteration.size(); ++i) {
    const auto& it = r.per_iteration[i];
    for (const auto& [phase, sample] : {std::pair{"write", it.write}, std::pair{"read", it.read}}) {
      out << to_string(s.workload) << "," << to_string(s.mode) << "," << s.nodes << "," << s.ppn << ","
          << s.size_per_proc_bytes << "," << i << "," << phase << "," << sample.bytes << ","
          << fmt_double(sample.seconds) << "," << fmt_double(sample.bandwidth) << "\n";
    }
  }
}

void write_mdtest_csv(std::ostream& out, const BenchResult& r, bool header) {
  if (header) out << kMdtestCsvHeader << "\n";
  for (std::size_t i = 0; i < r.ops_per_iteration.size(); ++i) {
    for (const auto& row : r.ops_per_iteration[i]) {
      out << "mdtest," << i << "," << to_string(row.target) << "," << row.operation << "," << row.count << ","
          << fmt_double(row.seconds) << "," << fmt_double(row.ops_per_sec) << "\n";
    }
  }
}

void write_summary(std::ostream& out, const BenchResult& r) {
  const auto& s = r.spec;
  out << to_string(s.workload);
  if (s.workload != Workload::mdtest) out << " (" << to_string(s.mode) << ")";
  out << ": " << s.nodes << " node(s) x " << s.ppn << " ppn, " << r.per_iteration.size() + r.ops_per_iteration.size()
      << " iteration(s)\n";
  if (s.workload == Workload::mdtest) {
    out << std::left << std::setw(12) << "target" << std::setw(12) << "operation" << std::right << std::setw(12)
        << "count" << std::setw(16) << "ops/s" << "\n";
    for (const auto& row : r.ops_table) {
      out << std::left << std::setw(12) << to_string(row.target) << std::setw(12) << row.operation << std::right
          << std::setw(12) << row.count << std::setw(16) << std::fixed << std::setprecision(2) << row.ops_per_sec
          << "\n";
    }
    out.unsetf(std::ios::fixed);
    return;
  }
  out << "file size: " << r.file_size_bytes << " B\n";
  std::vector<double> w, rd;
  for (const auto& it : r.per_iteration) {
    w.push_back(it.write.bandwidth);
    rd.push_back(it.read.bandwidth);
  }
  out << std::left << std::setw(8) << "phase" << std::right << std::setw(14) << "min MiB/s" << std::setw(14)
      << "median MiB/s" << std::setw(14) << "max MiB/s" << "\n";
  for (const auto& [phase, values] : {std::pair{"write", w}, std::pair{"read", rd}}) {
    auto sum = summarize(values);
    out << std::left << std::setw(8) << phase << std::right << std::fixed << std::setprecision(2) << std::setw(14)
        << sum.min / kMiB << std::setw(14) << sum.median / kMiB << std::setw(14) << sum.max / kMiB << "\n";
  }
  out.unsetf(std::ios::fixed);
}

}  // namespace ephemstore::bench
