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

#include <functional>
#include <optional>

namespace tdco {

/// Convex one-dimensional cost registered as (value, gradient, modulus).
/// Quadratics a*x^2 are built in; other costs supply callables and, for the
/// stepsize check, a strong-convexity modulus and a curvature bound.
class ScalarCost {
 public:
  using Fn = std::function<double(double)>;

  /// Zero cost.
  ScalarCost() = default;

  static ScalarCost quadratic(double coefficient);
  static ScalarCost custom(Fn value, Fn gradient, std::optional<double> modulus = std::nullopt,
                           std::optional<double> curvature_bound = std::nullopt);

  double value(double x) const;
  double gradient(double x) const;

  /// Strong-convexity modulus (2a for a quadratic).
  std::optional<double> modulus() const { return modulus_; }
  /// Upper bound on the second derivative (2a for a quadratic).
  std::optional<double> curvature_bound() const { return curvature_; }

  bool is_quadratic() const { return quadratic_.has_value(); }
  /// Throws ModelError for non-quadratic costs.
  double quadratic_coefficient() const;

 private:
  std::optional<double> quadratic_ = 0.0;
  Fn value_;
  Fn gradient_;
  std::optional<double> modulus_ = 0.0;
  std::optional<double> curvature_ = 0.0;
};

}  // namespace tdco
