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

#include "tdco/codispatch.hpp"

#include <algorithm>
#include <sstream>

namespace tdco {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw ModelError("solver epsilon must be positive");
  if (!(eta >= 0.0)) throw ModelError("solver eta must be non-negative");
  if (max_iterations < 0) throw ModelError("solver max_iterations must be non-negative");
  if (!(blowup_bound > 0.0)) throw ModelError("solver blowup bound must be positive");
}

double project_box(double value, double lo, double hi) {
  if (lo > hi) {
    std::ostringstream os;
    os << "project_box: empty box [" << lo << ", " << hi << "]";
    throw ModelError(os.str());
  }
  return std::clamp(value, lo, hi);
}

namespace {

Eigen::VectorXd feeder_block(const Eigen::VectorXd& global, const CoupledSystem& system,
                             std::size_t k) {
  return global.segment(static_cast<Eigen::Index>(system.offset(k)),
                        static_cast<Eigen::Index>(system.feeder(k).size()));
}

}  // namespace

FlowSnapshot predict_flows(const Problem& problem, const PrimalState& x, std::size_t tag) {
  problem.check_layout(x);
  FlowSnapshot snap;
  snap.source = FeedbackMode::kLinear;
  snap.iteration_tag = tag;
  const auto& system = problem.system();
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    FeederPrediction pred = problem.model(k).predict(feeder_block(x.p, system, k),
                                                     feeder_block(x.q, system, k));
    snap.v.push_back(std::move(pred.v));
    snap.p_substation.push_back(pred.p_substation);
    snap.losses.push_back(0.0);
  }
  return snap;
}

FlowSnapshot evaluate_flows(const Problem& problem, const PrimalState& x, FeedbackMode mode,
                            const SweepOptions& sweep, std::size_t tag) {
  if (mode == FeedbackMode::kLinear) return predict_flows(problem, x, tag);
  problem.check_layout(x);
  return solve_ac(problem.system(), x.p, x.q, sweep, tag);
}

Eigen::VectorXd voltage_constraint(const Eigen::VectorXd& v, const VoltageLimits& limits) {
  const auto n = v.size();
  Eigen::VectorXd g(2 * n);
  g.head(n) = v.array() - limits.v_max;
  g.tail(n) = limits.v_min - v.array();
  return g;
}

Eigen::VectorXd constraint_weight(const Eigen::VectorXd& mu_k) {
  const auto n = mu_k.size() / 2;
  return mu_k.head(n) - mu_k.tail(n);
}

double eval_lagrangian(const Problem& problem, const PrimalState& x, const DualState& y,
                       const SlackAccount& slack, double eta) {
  problem.check_layout(y);
  const FlowSnapshot flows = predict_flows(problem, x, 0);
  double value = problem.total_cost(x);
  double mu_sq = 0.0;
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    value += y.mu[k].dot(voltage_constraint(flows.v[k], problem.limits()));
    mu_sq += y.mu[k].squaredNorm();
  }
  const double residual = slack_residual(slack, problem.transmission(), x.p_m, flows.p_substation);
  value += y.lambda * residual;
  value -= 0.5 * eta * (y.lambda * y.lambda + mu_sq);
  return value;
}

PrimalGradient grad_primal(const Problem& problem, const PrimalState& x, const DualState& y,
                           bool zero_lambda_for_ders) {
  problem.check_layout(x);
  problem.check_layout(y);
  const auto& system = problem.system();
  const auto& costs = problem.costs();
  const double der_lambda = zero_lambda_for_ders ? 0.0 : y.lambda;

  PrimalGradient grad;
  grad.p.resize(x.p.size());
  grad.q.resize(x.q.size());
  grad.p_m.resize(x.p_m.size());
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    const LinearFeederModel& model = problem.model(k);
    const Eigen::VectorXd w = constraint_weight(y.mu[k]);
    const Eigen::VectorXd signal_p = -der_lambda * model.m + model.a.transpose() * w;
    const Eigen::VectorXd signal_q = -der_lambda * model.n + model.b.transpose() * w;
    const auto off = static_cast<Eigen::Index>(system.offset(k));
    for (Eigen::Index i = 0; i < signal_p.size(); ++i) {
      const auto g = static_cast<std::size_t>(off + i);
      grad.p(off + i) = costs.der_p[g].gradient(x.p(off + i)) + signal_p(i);
      grad.q(off + i) = costs.der_q[g].gradient(x.q(off + i)) + signal_q(i);
    }
  }
  for (Eigen::Index j = 0; j < x.p_m.size(); ++j) {
    grad.p_m(j) = costs.generator[static_cast<std::size_t>(j)].gradient(x.p_m(j)) + y.lambda;
  }
  return grad;
}

DualGradient grad_dual(const Problem& problem, const PrimalState& x, const DualState& y,
                       const FlowSnapshot& flows, const SlackAccount& slack, double eta,
                       std::size_t expected_tag) {
  if (flows.iteration_tag != expected_tag) {
    throw SolverError("stale feedback: flows are tagged " + std::to_string(flows.iteration_tag) +
                      ", expected " + std::to_string(expected_tag));
  }
  problem.check_layout(x);
  problem.check_layout(y);
  if (flows.v.size() != problem.feeder_count()) {
    throw ModelError("flow snapshot does not cover every feeder");
  }
  DualGradient grad;
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    grad.mu.push_back(voltage_constraint(flows.v[k], problem.limits()) - eta * y.mu[k]);
  }
  grad.lambda = slack_residual(slack, problem.transmission(), x.p_m, flows.p_substation) -
                eta * y.lambda;
  return grad;
}

namespace {

DualState dual_update(const DualState& y, const DualGradient& grad, double epsilon) {
  DualState out;
  out.lambda = y.lambda + epsilon * grad.lambda;
  out.mu.reserve(y.mu.size());
  for (std::size_t k = 0; k < y.mu.size(); ++k) {
    out.mu.push_back((y.mu[k] + epsilon * grad.mu[k]).cwiseMax(0.0));
  }
  return out;
}

}  // namespace

StepResult primal_dual_step(const Problem& problem, const DeviceStatus& status,
                            const PrimalState& x, const DualState& y, const FlowSnapshot& flows,
                            const SlackAccount& slack, const SolverConfig& config,
                            std::size_t tag) {
  const double eps = config.epsilon;
  const PrimalGradient gx = grad_primal(problem, x, y, config.zero_lambda_for_ders);

  StepResult out;
  out.x.p.resize(x.p.size());
  out.x.q.resize(x.q.size());
  out.x.p_m.resize(x.p_m.size());
  for (Eigen::Index i = 0; i < x.p.size(); ++i) {
    const auto g = static_cast<std::size_t>(i);
    const Box pb = problem.p_box(g, status);
    const Box qb = problem.q_box(g, status);
    out.x.p(i) = project_box(x.p(i) - eps * gx.p(i), pb.lo, pb.hi);
    out.x.q(i) = project_box(x.q(i) - eps * gx.q(i), qb.lo, qb.hi);
  }
  for (Eigen::Index j = 0; j < x.p_m.size(); ++j) {
    const Box b = problem.generator_box(static_cast<std::size_t>(j), status);
    out.x.p_m(j) = project_box(x.p_m(j) - eps * gx.p_m(j), b.lo, b.hi);
  }

  out.flows = evaluate_flows(problem, out.x, config.feedback, config.sweep, tag + 1);
  if (config.order == StepOrder::kSequential) {
    out.y = dual_update(y, grad_dual(problem, out.x, y, out.flows, slack, config.eta, tag + 1),
                        eps);
  } else {
    out.y = dual_update(y, grad_dual(problem, x, y, flows, slack, config.eta, tag), eps);
  }
  return out;
}

}  // namespace tdco
