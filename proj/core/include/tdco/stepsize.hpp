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

// Stepsize bound for the projected primal-dual iteration.
//
// The iteration map is x <- x - eps T(z) with T(z) = [dL/dx; -dL/dy]. Its
// Jacobian has the block form [[H, G^T], [-G, eta I]] where H is the cost
// Hessian and G the derivative of the dual gradient in x. The symmetric part
// is diag(H, eta I), so T is s-strongly monotone with s = min(moduli, eta),
// and it is l-Lipschitz with l <= max(curvature, eta) + |G|_2. Contraction
// holds for eps < 2 s / l^2.

#include <cstddef>
#include <vector>

#include "tdco/problem.hpp"

namespace tdco {

struct StepsizeReport {
  double s = 0.0;
  double l = 0.0;
  double bound = 0.0;  ///< 2 s / l^2
  /// True when eta == 0: s then ignores the dual block and the bound does
  /// not certify contraction.
  bool advisory = false;
  double coupling_norm = 0.0;          ///< |G|_2 over free coordinates
  std::vector<double> feeder_coupling;  ///< |G_k|_2 of each feeder's block

  bool admits(double epsilon) const { return epsilon > 0.0 && epsilon <= bound; }
};

/// Coordinates whose box is a single point never move and are left out.
/// Throws ModelError when a free coordinate's cost lacks a modulus or a
/// curvature bound, or when eta < 0.
StepsizeReport check_stepsize(const Problem& problem, const DeviceStatus& status, double eta);

/// The dense coupling matrix G over all coordinates (columns p, q, P_M; rows
/// lambda then mu blocks feeder by feeder). Exposed for tests.
Eigen::MatrixXd coupling_matrix(const Problem& problem);

}  // namespace tdco
