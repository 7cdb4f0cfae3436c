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

#include "ephemstore/error.hpp"

namespace ephemstore {

ParseError::ParseError(int line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

InsufficientNodes::InsufficientNodes(std::size_t requested, std::size_t eligible)
    : AllocationError("insufficient eligible nodes: requested " +
                      std::to_string(requested) + ", " +
                      std::to_string(eligible) + " eligible"),
      requested_(requested),
      eligible_(eligible) {}

InsufficientDisks::InsufficientDisks(const std::string& node, std::size_t have,
                                     std::size_t need)
    : PlanningError("insufficient disks on node " + node + ": has " +
                    std::to_string(have) + ", policy needs " +
                    std::to_string(need)),
      node_(node) {}

TargetError::TargetError(const std::string& target, const std::string& what)
    : Error("target " + target + ": " + what), target_(target) {}

ServiceFailed::ServiceFailed(const std::string& service, const std::string& what)
    : Error("service " + service + " failed: " + what), service_(service) {}

VerificationError::VerificationError(const std::string& file, std::uint64_t offset)
    : Error("verification mismatch in " + file + " at offset " +
            std::to_string(offset)),
      offset_(offset) {}

}  // namespace ephemstore
