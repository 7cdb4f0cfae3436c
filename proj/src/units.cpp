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

#include "ephemstore/units.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <limits>

#include "ephemstore/error.hpp"

namespace ephemstore {

std::uint64_t parse_uint(std::string_view text) {
  std::uint64_t value = 0;
  auto* first = text.data();
  auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw UsageError("not a non-negative integer: '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_size(std::string_view text) {
  std::size_t digits = 0;
  while (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits]))) {
    ++digits;
  }
  if (digits == 0) throw UsageError("bad size: '" + std::string(text) + "'");
  std::uint64_t base = parse_uint(text.substr(0, digits));
  std::string suffix;
  for (char c : text.substr(digits)) suffix.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::uint64_t mult = 1;
  if (suffix.empty() || suffix == "b") mult = 1;
  else if (suffix == "k" || suffix == "kib") mult = kKiB;
  else if (suffix == "m" || suffix == "mib") mult = kMiB;
  else if (suffix == "g" || suffix == "gib") mult = kGiB;
  else if (suffix == "t" || suffix == "tib") mult = kGiB * 1024;
  else if (suffix == "kb") mult = 1000ULL;
  else if (suffix == "mb") mult = 1000ULL * 1000;
  else if (suffix == "gb") mult = 1000ULL * 1000 * 1000;
  else if (suffix == "tb") mult = 1000ULL * 1000 * 1000 * 1000;
  else throw UsageError("bad size suffix: '" + std::string(text) + "'");
  if (base != 0 && mult > std::numeric_limits<std::uint64_t>::max() / base) {
    throw UsageError("size overflows: '" + std::string(text) + "'");
  }
  return base * mult;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string format_bytes(double bytes) {
  static const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB"};
  int u = 0;
  while (bytes >= 1024.0 && u < 4) {
    bytes /= 1024.0;
    ++u;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f %s", bytes, units[u]);
  return buf;
}

}  // namespace ephemstore
