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

#include <cstdint>
#include <string>
#include <string_view>

namespace ephemstore {

inline constexpr std::uint64_t kKiB = 1024;
inline constexpr std::uint64_t kMiB = 1024 * kKiB;
inline constexpr std::uint64_t kGiB = 1024 * kMiB;

// Parses "4096", "64KiB", "1MiB", "512MB", "2g". Bare K/M/G/T suffixes are
// binary (IOR convention); KB/MB/GB/TB are decimal. Throws UsageError.
std::uint64_t parse_size(std::string_view text);

// Strict non-negative integer parse. Throws UsageError on junk.
std::uint64_t parse_uint(std::string_view text);

std::string trim(std::string_view s);

std::string format_bytes(double bytes);

}  // namespace ephemstore
