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

// Brute-force reference solution for tiny instances: nested grid search
// with refinement over the free decision variables, one variable eliminated
// through the balance equation. Feasibility uses the linear feeder models,
// the same ones the engine prices with.

#include <string>
#include <vector>

#include "tdco/problem.hpp"

namespace tdco {

struct OracleOptions {
  int points = 25;           ///< grid points per dimension and level
  double window = 3.0;       ///< refined half-width in units of the previous spacing
  double resolution = 1e-4;  ///< stop once every spacing is below this
  int max_free = 4;          ///< free decision variables allowed, eliminated one included
};

struct OracleSolution {
  PrimalState x;
  double objective = 0.0;
  std::vector<std::string> variables;  ///< grid variables, then the eliminated one
  int levels = 0;
  double spacing = 0.0;  ///< final grid spacing
};

/// Max violation of the boxes, the voltage limits (linear model) and the
/// balance |r| = |P0_slack - P_slack|.
double constraint_violation(const Problem& problem, const DeviceStatus& status,
                            const PrimalState& x, double slack_reference);

/// Throws ModelError when the instance has more than max_free free
/// variables or nothing can absorb the balance, and SolverError when no grid
/// point is feasible.
OracleSolution solve_oracle(const Problem& problem, const DeviceStatus& status,
                            double slack_reference, const OracleOptions& options = {});

struct OracleReport {
  OracleSolution oracle;
  PrimalState engine_x;
  double engine_objective = 0.0;
  double relative_gap = 0.0;        ///< |f_engine - f_oracle| / |f_oracle| (absolute when f_oracle is 0)
  double max_coordinate_gap = 0.0;  ///< |x_engine - x_oracle|_inf
  double engine_violation = 0.0;

  std::string to_json() const;
};

OracleReport compare_with_oracle(const Problem& problem, const DeviceStatus& status,
                                 double slack_reference, const PrimalState& engine_x,
                                 const OracleOptions& options = {});

}  // namespace tdco
