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

// Exact radial power flow (DistFlow backward/forward sweep) per feeder and
// the lossless transmission bookkeeping around a frozen slack bus.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tdco/coupled_system.hpp"

namespace tdco {

struct SweepOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
};

/// Result of one feeder sweep. Branch quantities are indexed by the node the
/// branch feeds and are sending-end values.
struct FeederFlow {
  Eigen::VectorXd v;
  Eigen::VectorXd branch_p;
  Eigen::VectorXd branch_q;
  double p_substation = 0.0;
  double q_substation = 0.0;
  double losses = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Backward/forward sweep on the DistFlow branch equations. `p`, `q` are DER
/// injections per node; node loads come from the network.
///
/// Throws PowerFlowError on voltage collapse (a squared voltage <= 0) or when
/// the voltage update is still above `tolerance` after max_iterations.
FeederFlow sweep_feeder(const FeederNetwork& network, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& q, const SweepOptions& options = {});

enum class FeedbackMode { kLinear, kAc };

/// Voltages and substation draws for every feeder of a coupled system,
/// tagged with the iteration whose primal state produced them.
struct FlowSnapshot {
  FeedbackMode source = FeedbackMode::kLinear;
  std::vector<Eigen::VectorXd> v;
  std::vector<double> p_substation;
  std::vector<double> losses;
  int sweep_iterations = 0;  ///< worst feeder, AC only
  double residual = 0.0;     ///< worst feeder, AC only
  std::size_t iteration_tag = 0;
};

using AcSolution = FlowSnapshot;

/// Runs sweep_feeder on every feeder. `p`, `q` are global N-vectors.
AcSolution solve_ac(const CoupledSystem& system, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q, const SweepOptions& options,
                    std::size_t iteration_tag);
/// Same, for bare networks laid out at `offsets` in the global vectors.
AcSolution solve_ac(const std::vector<FeederNetwork>& networks,
                    const std::vector<std::size_t>& offsets, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q, const SweepOptions& options,
                    std::size_t iteration_tag);

/// Output the slack bus must supply under the lossless transmission balance:
/// sum(P_L) - sum(P_M) - sum(P0).
double slack_output(const TransmissionSystem& ts, const Eigen::VectorXd& p_m,
                    const std::vector<double>& p_substation);
double slack_output(double total_p0, const Eigen::VectorXd& p_m,
                    const std::vector<double>& p_substation);

/// The slack bus output frozen at the start of a run.
class SlackAccount {
 public:
  SlackAccount() = default;
  explicit SlackAccount(double reference) : reference_(reference) {}

  /// Records P0_slack. Throws SolverError if already recorded.
  void record(double p_slack);
  bool initialized() const { return reference_.has_value(); }
  /// Throws SolverError if not recorded.
  double reference() const;

 private:
  std::optional<double> reference_;
};

/// P0_slack - P_slack(P_M, P_L). Zero when generation and feeder draws
/// balance without the slack bus moving off its recorded output.
double slack_residual(const SlackAccount& account, const TransmissionSystem& ts,
                      const Eigen::VectorXd& p_m, const std::vector<double>& p_substation);
double slack_residual(const SlackAccount& account, double total_p0, const Eigen::VectorXd& p_m,
                      const std::vector<double>& p_substation);

}  // namespace tdco
