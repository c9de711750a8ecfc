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

// Market implementation of the primal-dual iteration: DER users and
// generators respond to broadcast prices, the network operator computes
// flows, updates multipliers and publishes new prices. Agents talk only
// through an in-process message bus.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tdco/solver.hpp"

namespace tdco {

/// Per-node prices. alpha[k] and beta[k] cover every node of feeder k.
struct IncentiveSignals {
  double lambda = 0.0;  ///< what generators see
  std::vector<Eigen::VectorXd> alpha;
  std::vector<Eigen::VectorXd> beta;
  std::size_t iteration_tag = 0;
};

/// alpha_k = -lambda M_k + A_k^T (mu_up - mu_lo), beta_k likewise with N_k, B_k.
/// `der_lambda` is the lambda used in the DER prices; generators always get
/// `lambda`.
IncentiveSignals compute_signals(const std::vector<LinearFeederModel>& models, double lambda,
                                 double der_lambda, const std::vector<Eigen::VectorXd>& mu,
                                 std::size_t tag);

enum class MessageKind { kSignalBroadcast, kSetpointReport, kPfResult, kDualUpdate };

std::string to_string(MessageKind kind);

struct DerReport {
  std::size_t global = 0;
  double p = 0.0;
  double q = 0.0;
};

struct GeneratorReport {
  std::size_t generator = 0;
  double p_m = 0.0;
};

struct PfResult {
  std::size_t feeder = 0;
  Eigen::VectorXd v;
  double p_substation = 0.0;
  double losses = 0.0;
};

struct DualUpdate {
  double lambda = 0.0;
  std::vector<Eigen::VectorXd> mu;
};

using MessagePayload =
    std::variant<IncentiveSignals, DerReport, GeneratorReport, PfResult, DualUpdate>;

struct AgentMessage {
  MessageKind kind = MessageKind::kSignalBroadcast;
  std::string sender;
  std::size_t iteration_tag = 0;
  MessagePayload payload;

  /// Debug dump: {"kind", "sender", "iteration_tag", "payload"}.
  std::string to_json() const;
};

enum class FaultAction { kDeliver, kDrop, kDelay };
using FaultInjector = std::function<FaultAction(const AgentMessage&)>;

/// Deterministic in-process delivery: messages come out in posting order.
/// Delayed messages are held until the next flush. Synchronous rounds treat
/// any fault as an abort, so collect() throws SolverError if a message of the
/// round was dropped or delayed.
class MessageBus {
 public:
  void set_fault_injector(FaultInjector injector) { injector_ = std::move(injector); }

  void post(AgentMessage message);
  /// All delivered messages of `kind`; throws SolverError on a fault or a
  /// message whose tag differs from `tag`.
  std::vector<AgentMessage> collect(MessageKind kind, std::size_t tag);
  /// Starts a new round: releases delayed messages into the queue.
  void flush();

  std::size_t delivered() const { return delivered_; }
  const std::vector<AgentMessage>& log() const { return log_; }
  void keep_log(bool on) { keep_log_ = on; }

 private:
  FaultInjector injector_;
  std::vector<AgentMessage> queue_;
  std::vector<AgentMessage> delayed_;
  std::vector<AgentMessage> log_;
  bool keep_log_ = false;
  bool faulted_ = false;
  std::string fault_;
  std::size_t delivered_ = 0;
};

enum class UserMode { kGradient, kBestResponse };

/// One DER owner. Holds its private cost and box; sees only its own prices.
class DerAgent {
 public:
  DerAgent(std::string name, std::size_t global, std::size_t feeder, std::size_t node, Der der,
           ScalarCost cost_p, ScalarCost cost_q, double p0, double q0);

  const std::string& name() const { return name_; }
  std::size_t global() const { return global_; }
  double p() const { return p_; }
  double q() const { return q_; }

  /// Projected gradient step on C(p, q) + alpha p + beta q.
  void gradient_step(double alpha, double beta, double epsilon);
  /// Box-clamped minimizer of the same objective; quadratic costs only
  /// (throws ModelError otherwise).
  void best_response(double alpha, double beta);
  /// Capacity events multiply the scale of the box.
  void scale_capacity(double factor);

  Box p_box() const;
  Box q_box() const;

 private:
  std::string name_;
  std::size_t global_;
  std::size_t feeder_;
  std::size_t node_;
  Der der_;
  ScalarCost cost_p_;
  ScalarCost cost_q_;
  double scale_ = 1.0;
  double p_ = 0.0;
  double q_ = 0.0;
};

class GeneratorAgent {
 public:
  GeneratorAgent(std::string name, std::size_t index, Generator gen, ScalarCost cost, double p0);

  const std::string& name() const { return name_; }
  std::size_t index() const { return index_; }
  double p_m() const { return p_m_; }
  bool online() const { return online_; }

  /// P <- clamp(P - eps (dC/dP + lambda)); an offline unit stays at 0.
  void step(double lambda, double epsilon);
  void go_offline();

 private:
  std::string name_;
  std::size_t index_;
  Generator gen_;
  ScalarCost cost_;
  bool online_;
  double p_m_;
};

/// Everything the operator is allowed to know: topology and impedances,
/// the linear models, the bulk injections and the voltage limits. No DER
/// costs or boxes are reachable from here.
struct OperatorView {
  std::vector<FeederNetwork> networks;
  std::vector<LinearFeederModel> models;
  std::vector<std::size_t> offsets;
  std::size_t node_count = 0;
  std::size_t generator_count = 0;
  double total_p0 = 0.0;
  VoltageLimits limits;

  static OperatorView from_problem(const Problem& problem);
};

class OperatorAgent {
 public:
  OperatorAgent(OperatorView view, const SolverConfig& config, DualState y0);

  /// Flows for the reported setpoints, tagged `tag`.
  FlowSnapshot power_flow(const Eigen::VectorXd& p, const Eigen::VectorXd& q, std::size_t tag) const;
  /// Records P0_slack from the first flows unless the config fixes it.
  void initialize_slack(const Eigen::VectorXd& p_m, const FlowSnapshot& flows);
  /// Dual ascent with the slack-residual balance; mu projected to >= 0.
  void update_duals(const Eigen::VectorXd& p_m, const FlowSnapshot& flows);
  IncentiveSignals signals(std::size_t tag) const;

  double residual(const Eigen::VectorXd& p_m, const FlowSnapshot& flows) const;
  const DualState& dual() const { return y_; }
  double slack_reference() const { return slack_.reference(); }
  const OperatorView& view() const { return view_; }

 private:
  OperatorView view_;
  SolverConfig config_;
  DualState y_;
  SlackAccount slack_;
};

struct MarketOptions {
  UserMode mode = UserMode::kGradient;
  FaultInjector faults;
  /// Recompute alpha and beta from the published multipliers every round
  /// and fail if the broadcast differs.
  bool check_signals = true;
};

/// Runs rounds of user steps, generator steps, power flow
/// and dual update through the bus. Only the sequential step order exists in
/// the market; a Jacobi config is rejected with ModelError.
class MarketEngine : public IterativeEngine {
 public:
  MarketEngine(const Problem& problem, const SolverConfig& config, const PrimalState& x0,
               const DualState& y0, MarketOptions options = {});

  const PrimalState& primal() const override { return x_; }
  const DualState& dual() const override { return operator_.dual(); }
  const FlowSnapshot& flows() const override { return flows_; }
  const DeviceStatus& status() const override { return status_; }
  double residual() const override { return operator_.residual(x_.p_m, flows_); }
  double slack_reference() const override { return operator_.slack_reference(); }

  void apply(const DispatchEvent& event) override;
  void step(std::size_t tag) override;

  const IncentiveSignals& signals() const { return signals_; }
  MessageBus& bus() { return bus_; }

 private:
  /// Collects setpoint reports into x and the matching pf-results into flows.
  void gather(std::size_t tag);

  const Problem& problem_;
  SolverConfig config_;
  MarketOptions options_;
  std::vector<DerAgent> ders_;
  std::vector<GeneratorAgent> generators_;
  OperatorAgent operator_;
  MessageBus bus_;
  DeviceStatus status_;  ///< mirror of agent-side availability for reporting
  PrimalState x_;        ///< as last reported to the operator
  FlowSnapshot flows_;
  IncentiveSignals signals_;
};

SolveResult run_market(const Problem& problem, const SolverConfig& config,
                       const std::vector<DispatchEvent>& events = {}, const InitOptions& init = {},
                       MarketOptions options = {}, const IterationObserver& observer = {});

}  // namespace tdco
