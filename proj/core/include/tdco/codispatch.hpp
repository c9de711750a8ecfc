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

// Regularized Lagrangian of the joint dispatch / voltage regulation problem,
// its partial gradients and one projected primal-dual step.
//
//   L(x, y) = sum C(x) + sum_k mu_k^T g_k(v_k) + lambda * r(x) - eta (lambda^2 + |mu|^2) / 2
//
// with g_k(v) = [v - v_max; v_min - v] and r(x) the balance residual around
// the frozen slack bus (see slack_residual). With a zero slack reference r
// is sum_k (P_M - P_L + P0).

#include <cstddef>
#include <optional>

#include "tdco/ac_powerflow.hpp"
#include "tdco/problem.hpp"

namespace tdco {

enum class StepOrder {
  /// Duals use the flows of the freshly updated primal state, as the
  /// operator does when it collects setpoint reports before pricing.
  kSequential,
  /// Both blocks use gradients at (x(t), y(t)).
  kJacobi,
};

struct SolverConfig {
  double epsilon = 5e-4;
  double eta = 0.0;
  int max_iterations = 10000;
  double primal_tolerance = 1e-6;   ///< on |x(t+1) - x(t)|_inf / epsilon
  double dual_tolerance = 1e-6;     ///< on |y(t+1) - y(t)|_inf / epsilon
  double balance_tolerance = 1e-8;  ///< on |slack residual|
  double blowup_bound = 1e8;        ///< divergence detector on |x|_inf and |lambda|
  StepOrder order = StepOrder::kSequential;
  FeedbackMode feedback = FeedbackMode::kLinear;
  SweepOptions sweep;
  /// Baseline without DER participation in the balance: DER price signals
  /// carry the voltage term only. Generators still see lambda.
  bool zero_lambda_for_ders = false;
  /// When false the run always lasts max_iterations steps, so traces of
  /// different runs share one horizon.
  bool stop_at_convergence = true;
  /// Fixed P0_slack; when empty it is recorded from the initial state.
  std::optional<double> slack_reference;

  /// Throws ModelError on epsilon <= 0, eta < 0 or max_iterations < 0.
  void validate() const;
};

/// Clamp onto [lo, hi]; throws ModelError when lo > hi.
double project_box(double value, double lo, double hi);

/// Voltages and substation draws predicted by the linear feeder models.
FlowSnapshot predict_flows(const Problem& problem, const PrimalState& x, std::size_t tag);

/// Voltages and substation draws from the selected feedback source.
FlowSnapshot evaluate_flows(const Problem& problem, const PrimalState& x, FeedbackMode mode,
                            const SweepOptions& sweep, std::size_t tag);

/// Stacked box constraint g_k(v) = [v - v_max; v_min - v].
Eigen::VectorXd voltage_constraint(const Eigen::VectorXd& v, const VoltageLimits& limits);

/// grad_v g_k^T mu_k = mu_upper - mu_lower.
Eigen::VectorXd constraint_weight(const Eigen::VectorXd& mu_k);

double eval_lagrangian(const Problem& problem, const PrimalState& x, const DualState& y,
                       const SlackAccount& slack, double eta);

struct PrimalGradient {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  Eigen::VectorXd p_m;
};

struct DualGradient {
  double lambda = 0.0;
  std::vector<Eigen::VectorXd> mu;
};

/// dL/dp_k = grad C - lambda M_k + A_k^T (mu_up - mu_lo), dL/dq_k likewise
/// with N_k, B_k, and dL/dP_M = dC/dP + lambda. With zero_lambda_for_ders the
/// lambda term is dropped from the DER blocks only.
PrimalGradient grad_primal(const Problem& problem, const PrimalState& x, const DualState& y,
                           bool zero_lambda_for_ders = false);

/// dL/dmu_k = g_k(v_k) - eta mu_k, dL/dlambda = r(x) - eta lambda, using the
/// voltages and substation draws in `flows`. Throws SolverError when
/// flows.iteration_tag differs from `expected_tag`.
DualGradient grad_dual(const Problem& problem, const PrimalState& x, const DualState& y,
                       const FlowSnapshot& flows, const SlackAccount& slack, double eta,
                       std::size_t expected_tag);

struct StepResult {
  PrimalState x;
  DualState y;
  FlowSnapshot flows;  ///< flows of the new primal state, tagged tag + 1
};

/// One projected primal-dual iteration from iteration `tag`. `flows` must be
/// the snapshot of `x` (tag `tag`); the returned flows belong to the new x.
StepResult primal_dual_step(const Problem& problem, const DeviceStatus& status,
                            const PrimalState& x, const DualState& y, const FlowSnapshot& flows,
                            const SlackAccount& slack, const SolverConfig& config,
                            std::size_t tag);

}  // namespace tdco
