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

#include "ephemstore/constraint.hpp"

#include <cctype>

#include "ephemstore/error.hpp"
#include "ephemstore/units.hpp"

namespace ephemstore::inventory {

class ConstraintParser {
 public:
  using Node = Constraint::Node;

  explicit ConstraintParser(std::string_view text) : text_(text) {}

  Node parse() {
    Node node = parse_any();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return node;
  }

 private:
  Node parse_any() {
    Node first = parse_all();
    if (!peek('|')) return first;
    Node node{Node::Kind::any_of, {}, {}};
    node.children.push_back(std::move(first));
    while (peek('|')) {
      ++pos_;
      node.children.push_back(parse_all());
    }
    return node;
  }

  Node parse_all() {
    Node first = parse_atom();
    if (!peek('&')) return first;
    Node node{Node::Kind::all_of, {}, {}};
    node.children.push_back(std::move(first));
    while (peek('&')) {
      ++pos_;
      node.children.push_back(parse_atom());
    }
    return node;
  }

  Node parse_atom() {
    if (peek('(')) {
      ++pos_;
      Node inner = parse_any();
      if (!peek(')')) fail("missing ')'");
      ++pos_;
      return inner;
    }
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_feature_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected a feature name");
    return Node{Node::Kind::literal, std::string(text_.substr(start, pos_ - start)), {}};
  }

  static bool is_feature_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw UsageError("constraint '" + std::string(text_) + "' at column " +
                     std::to_string(pos_ + 1) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Constraint Constraint::parse(std::string_view text) {
  Constraint c;
  c.text_ = trim(text);
  if (c.text_.empty()) return c;
  c.root_ = std::make_shared<const Node>(ConstraintParser(c.text_).parse());
  return c;
}

bool Constraint::matches(const std::set<std::string>& features) const {
  return root_ == nullptr || eval(*root_, features);
}

std::set<std::string> Constraint::literals() const {
  std::set<std::string> out;
  if (root_) collect(*root_, out);
  return out;
}

bool Constraint::eval(const Node& node, const std::set<std::string>& features) {
  switch (node.kind) {
    case Node::Kind::literal:
      return features.count(node.literal) != 0;
    case Node::Kind::all_of:
      for (const auto& child : node.children) {
        if (!eval(child, features)) return false;
      }
      return true;
    case Node::Kind::any_of:
      for (const auto& child : node.children) {
        if (eval(child, features)) return true;
      }
      return false;
  }
  return false;
}

void Constraint::collect(const Node& node, std::set<std::string>& out) {
  if (node.kind == Node::Kind::literal) out.insert(node.literal);
  for (const auto& child : node.children) collect(child, out);
}

}  // namespace ephemstore::inventory
