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

#include "doctest.h"
#include "ephemstore/error.hpp"
#include "ephemstore/units.hpp"

using namespace ephemstore;

TEST_CASE("parse_size handles binary and decimal suffixes") {
  CHECK(parse_size("0") == 0);
  CHECK(parse_size("512") == 512);
  CHECK(parse_size("4K") == 4096);
  CHECK(parse_size("64KiB") == 64 * 1024);
  CHECK(parse_size("1MiB") == 1048576);
  CHECK(parse_size("4m") == 4 * kMiB);
  CHECK(parse_size("2GiB") == 2 * kGiB);
  CHECK(parse_size("1TiB") == kGiB * 1024);
  CHECK(parse_size("512MB") == 512000000ULL);
  CHECK(parse_size("5KB") == 5000);
  CHECK(parse_size("3GB") == 3000000000ULL);
  CHECK(parse_size("2TB") == 2000000000000ULL);
  CHECK(parse_size("7b") == 7);
}

TEST_CASE("parse_size rejects junk") {
  CHECK_THROWS_AS(parse_size(""), UsageError);
  CHECK_THROWS_AS(parse_size("MiB"), UsageError);
  CHECK_THROWS_AS(parse_size("-1"), UsageError);
  CHECK_THROWS_AS(parse_size("4 MiB"), UsageError);
  CHECK_THROWS_AS(parse_size("4PiB"), UsageError);
  CHECK_THROWS_AS(parse_size("99999999999999TiB"), UsageError);
}

TEST_CASE("parse_uint") {
  CHECK(parse_uint("18446744073709551615") == UINT64_MAX);
  CHECK_THROWS_AS(parse_uint("18446744073709551616"), UsageError);
  CHECK_THROWS_AS(parse_uint("12a"), UsageError);
  CHECK_THROWS_AS(parse_uint(""), UsageError);
}

TEST_CASE("trim and format_bytes") {
  CHECK(trim("  a b \t\n") == "a b");
  CHECK(trim("   ").empty());
  CHECK(format_bytes(0) == "0.00 B");
  CHECK(format_bytes(1536) == "1.50 KiB");
  CHECK(format_bytes(3.0 * kGiB) == "3.00 GiB");
}
