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

// Decision/multiplier layouts and the immutable problem data shared by the
// centralized engine and the market agents.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tdco/ac_powerflow.hpp"
#include "tdco/coupled_system.hpp"
#include "tdco/costs.hpp"
#include "tdco/lin_model.hpp"

namespace tdco {

/// x = (p, q, P_M): DER real/reactive injections per feeder node (global
/// N-vectors, feeder-major) and generator setpoints.
struct PrimalState {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  Eigen::VectorXd p_m;
};

/// y = (lambda, mu). mu[k] has 2 N_k entries: the upper-limit multipliers
/// for v_k - v_max followed by the lower-limit ones for v_min - v_k.
struct DualState {
  double lambda = 0.0;
  std::vector<Eigen::VectorXd> mu;

  static DualState zeros(const CoupledSystem& system);
};

/// Max-abs difference over all coordinates; throws ModelError on a layout
/// mismatch.
double max_abs_diff(const PrimalState& a, const PrimalState& b);
double max_abs_diff(const DualState& a, const DualState& b);

struct CostTable {
  std::vector<ScalarCost> generator;
  std::vector<ScalarCost> der_p;  ///< global N; zero cost where no DER
  std::vector<ScalarCost> der_q;

  /// Quadratic costs from the generator and DER coefficients.
  static CostTable from_system(const CoupledSystem& system);
};

/// Run-time availability that scenario events change: generator outages and
/// DER capacity scaling on top of each DER's own capacity_scale.
struct DeviceStatus {
  std::vector<bool> generator_online;
  std::vector<double> der_scale;  ///< global N

  static DeviceStatus from_system(const CoupledSystem& system);
};

class Problem {
 public:
  /// Builds the LinDistFlow model of every feeder and quadratic costs.
  Problem(CoupledSystem system, VoltageLimits limits);
  Problem(CoupledSystem system, std::vector<LinearFeederModel> models, VoltageLimits limits,
          CostTable costs);

  const CoupledSystem& system() const { return system_; }
  const TransmissionSystem& transmission() const { return system_.transmission(); }
  const std::vector<LinearFeederModel>& models() const { return models_; }
  const LinearFeederModel& model(std::size_t k) const { return models_.at(k); }
  const VoltageLimits& limits() const { return limits_; }
  const CostTable& costs() const { return costs_; }

  std::size_t node_count() const { return system_.node_count(); }
  std::size_t generator_count() const { return system_.generator_count(); }
  std::size_t feeder_count() const { return system_.feeder_count(); }
  /// m = sum of 2 N_k.
  std::size_t constraint_count() const { return 2 * system_.node_count(); }

  Box p_box(std::size_t global, const DeviceStatus& status) const;
  Box q_box(std::size_t global, const DeviceStatus& status) const;
  Box generator_box(std::size_t k, const DeviceStatus& status) const;

  /// Projects every coordinate onto its box.
  PrimalState project(const PrimalState& x, const DeviceStatus& status) const;

  /// Throws ModelError unless x and y match this problem's layout.
  void check_layout(const PrimalState& x) const;
  void check_layout(const DualState& y) const;

  /// Total generation plus DER cost.
  double total_cost(const PrimalState& x) const;

 private:
  CoupledSystem system_;
  std::vector<LinearFeederModel> models_;
  VoltageLimits limits_;
  CostTable costs_;
};

}  // namespace tdco
