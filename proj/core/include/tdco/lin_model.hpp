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

#include <Eigen/Dense>

#include "tdco/grid_model.hpp"

namespace tdco {

struct FeederPrediction {
  Eigen::VectorXd v;
  double p_substation = 0.0;
};

/// Affine feeder model in the DER injections:
///   v   = A p + B q + c
///   P_L = M^T p + N^T q + d
/// where v are node voltage magnitudes and P_L is the real power drawn at the
/// substation (positive = load).
struct LinearFeederModel {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd m;
  Eigen::VectorXd n;
  double d = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(c.size()); }

  /// Throws ModelError on dimension mismatch.
  FeederPrediction predict(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const;
};

/// LinDistFlow sensitivities around the zero-DER, nominal-load point.
///
/// A[i][j] is the resistance of the path shared by the substation->i and
/// substation->j paths, divided by v0 (B likewise with reactance); this is
/// the squared-magnitude LinDistFlow relation divided by 2 v0. Loads enter
/// the offset c, so the model is affine in the DER injections only. The
/// substation model is lossless: M = -1, N = 0, d = total real load.
LinearFeederModel build_lindistflow(const FeederNetwork& network);

}  // namespace tdco
