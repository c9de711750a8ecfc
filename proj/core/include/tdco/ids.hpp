// Copyright 2026 The tdco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace tdco {

/// Integer identifier tagged with the kind of element it names, so a bus id
/// cannot be passed where a feeder node id is expected.
template <class Tag>
struct Id {
  int value = 0;

  constexpr Id() = default;
  constexpr explicit Id(int v) : value(v) {}
  auto operator<=>(const Id&) const = default;
};

using BusId = Id<struct BusTag>;
using NodeId = Id<struct NodeTag>;
using GeneratorId = Id<struct GeneratorTag>;

template <class Tag>
std::string to_string(Id<Tag> id) {
  return std::to_string(id.value);
}

// Error hierarchy. Every error carries a human readable message naming the
// offending element.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid case / scenario input.
class CaseError : public Error {
 public:
  using Error::Error;
};

/// Invalid arguments to a numerical routine (dimension mismatch, empty box).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Power flow failed to converge or collapsed.
class PowerFlowError : public Error {
 public:
  using Error::Error;
};

/// The saddle-point iteration blew up or was fed inconsistent data.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Raised by the divergence detector; the message carries the iteration.
class DivergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace tdco

template <class Tag>
struct std::hash<tdco::Id<Tag>> {
  std::size_t operator()(tdco::Id<Tag> id) const noexcept {
    return std::hash<int>{}(id.value);
  }
};
