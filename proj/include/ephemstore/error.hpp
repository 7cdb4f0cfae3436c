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
#include <stdexcept>
#include <string>

namespace ephemstore {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class AllocationError : public Error {
 public:
  using Error::Error;
};

class InsufficientNodes : public AllocationError {
 public:
  InsufficientNodes(std::size_t requested, std::size_t eligible);
  std::size_t requested() const { return requested_; }
  std::size_t eligible() const { return eligible_; }

 private:
  std::size_t requested_;
  std::size_t eligible_;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

class InsufficientDisks : public PlanningError {
 public:
  InsufficientDisks(const std::string& node, std::size_t have, std::size_t need);
  const std::string& node() const { return node_; }

 private:
  std::string node_;
};

// Wire-level failure: malformed frame, closed connection, bad magic.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Namespace errors surfaced by the metadata service.
class NotFound : public Error {
 public:
  using Error::Error;
};
class AlreadyExists : public Error {
 public:
  using Error::Error;
};
class NotEmpty : public Error {
 public:
  using Error::Error;
};
class NotADirectory : public Error {
 public:
  using Error::Error;
};
class IsADirectory : public Error {
 public:
  using Error::Error;
};

// A storage target failed or is unreachable.
class TargetError : public Error {
 public:
  TargetError(const std::string& target, const std::string& what);
  const std::string& target() const { return target_; }

 private:
  std::string target_;
};

class NamespaceFull : public TargetError {
 public:
  using TargetError::TargetError;
};

class ManagementUnreachable : public Error {
 public:
  using Error::Error;
};

class PortCollision : public Error {
 public:
  using Error::Error;
};

class ServiceFailed : public Error {
 public:
  ServiceFailed(const std::string& service, const std::string& what);
  const std::string& service() const { return service_; }

 private:
  std::string service_;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class VerificationError : public Error {
 public:
  VerificationError(const std::string& file, std::uint64_t offset);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace ephemstore
