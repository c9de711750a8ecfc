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

#include "tdco/costs.hpp"

#include "tdco/ids.hpp"

namespace tdco {

ScalarCost ScalarCost::quadratic(double coefficient) {
  ScalarCost c;
  c.quadratic_ = coefficient;
  c.modulus_ = 2.0 * coefficient;
  c.curvature_ = 2.0 * coefficient;
  return c;
}

ScalarCost ScalarCost::custom(Fn value, Fn gradient, std::optional<double> modulus,
                              std::optional<double> curvature_bound) {
  if (!value || !gradient) throw ModelError("custom cost needs value and gradient callables");
  ScalarCost c;
  c.quadratic_.reset();
  c.value_ = std::move(value);
  c.gradient_ = std::move(gradient);
  c.modulus_ = modulus;
  c.curvature_ = curvature_bound;
  return c;
}

double ScalarCost::value(double x) const {
  if (quadratic_) return *quadratic_ * x * x;
  return value_(x);
}

double ScalarCost::gradient(double x) const {
  if (quadratic_) return 2.0 * *quadratic_ * x;
  return gradient_(x);
}

double ScalarCost::quadratic_coefficient() const {
  if (!quadratic_) throw ModelError("cost is not quadratic");
  return *quadratic_;
}

}  // namespace tdco
