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

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ephemstore::inventory {

// Boolean expression over node feature literals: `storage`, `gpu|mc`,
// `storage&(nvme|ssd)`. `&` binds tighter than `|`. An empty expression
// matches every node.
class Constraint {
 public:
  Constraint() = default;

  // Throws UsageError on malformed input.
  static Constraint parse(std::string_view text);

  bool matches(const std::set<std::string>& features) const;
  std::set<std::string> literals() const;
  const std::string& text() const { return text_; }
  bool empty() const { return root_ == nullptr; }

 private:
  struct Node {
    enum class Kind { literal, all_of, any_of } kind = Kind::literal;
    std::string literal;
    std::vector<Node> children;
  };
  friend class ConstraintParser;

  static bool eval(const Node& node, const std::set<std::string>& features);
  static void collect(const Node& node, std::set<std::string>& out);

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace ephemstore::inventory
