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

#include "tdco/ac_powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tdco {

FeederFlow sweep_feeder(const FeederNetwork& network, const Eigen::VectorXd& p,
                        const Eigen::VectorXd& q, const SweepOptions& options) {
  const auto size = static_cast<Eigen::Index>(network.size());
  if (p.size() != size || q.size() != size) {
    throw ModelError("sweep_feeder: injection size mismatch on feeder " + network.name());
  }
  if (!(options.tolerance > 0.0)) throw ModelError("sweep_feeder: tolerance must be positive");

  const auto& nodes = network.nodes();
  const auto& order = network.order();
  const double v0 = network.v0();

  FeederFlow flow;
  flow.v = Eigen::VectorXd::Constant(size, v0);
  flow.branch_p = Eigen::VectorXd::Zero(size);
  flow.branch_q = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd loss_p(size);
  Eigen::VectorXd recv_current(size);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    // Backward: receiving-end flow is local net consumption plus what the
    // children draw; the series loss uses the current receiving voltage.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t i = *it;
      const auto ii = static_cast<Eigen::Index>(i);
      double recv_p = nodes[i].p_load - p(ii);
      double recv_q = nodes[i].q_load - q(ii);
      for (std::size_t c : network.children(i)) {
        recv_p += flow.branch_p(static_cast<Eigen::Index>(c));
        recv_q += flow.branch_q(static_cast<Eigen::Index>(c));
      }
      const FeederLine& line = network.line_into(i);
      const double current_sq = (recv_p * recv_p + recv_q * recv_q) / (flow.v(ii) * flow.v(ii));
      recv_current(ii) = current_sq;
      loss_p(ii) = line.r * current_sq;
      flow.branch_p(ii) = recv_p + line.r * current_sq;
      flow.branch_q(ii) = recv_q + line.x * current_sq;
    }

    // Forward: squared-voltage drop along each branch.
    double change = 0.0;
    for (std::size_t i : order) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto parent = network.parent(i);
      const double v_up = parent ? flow.v(static_cast<Eigen::Index>(*parent)) : v0;
      const FeederLine& line = network.line_into(i);
      const double sp = flow.branch_p(ii);
      const double sq = flow.branch_q(ii);
      const double current_sq = (sp * sp + sq * sq) / (v_up * v_up);
      const double v_sq = v_up * v_up - 2.0 * (line.r * sp + line.x * sq) +
                          (line.r * line.r + line.x * line.x) * current_sq;
      if (!(v_sq > 0.0)) {
        std::ostringstream os;
        os << "voltage collapse at node " << to_string(nodes[i].id) << " of feeder "
           << network.name() << " (sweep " << iter << ")";
        throw PowerFlowError(os.str());
      }
      const double v_new = std::sqrt(v_sq);
      change = std::max(change, std::abs(v_new - flow.v(ii)));
      flow.v(ii) = v_new;
    }

    if (change < options.tolerance) {
      // Past the loadability limit the sweep can settle where the current
      // seen from the sending end disagrees with the receiving end.
      for (std::size_t i : order) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto parent = network.parent(i);
        const double v_up = parent ? flow.v(static_cast<Eigen::Index>(*parent)) : v0;
        const double send = (flow.branch_p(ii) * flow.branch_p(ii) + flow.branch_q(ii) * flow.branch_q(ii)) /
                            (v_up * v_up);
        const double recv = recv_current(ii);
        if (std::abs(send - recv) > 1e-4 * std::max(1.0, send)) {
          std::ostringstream os;
          os << "sweep on feeder " << network.name() << " settled on a non-physical point: line into node "
             << to_string(nodes[i].id) << " carries squared current " << send << " at the sending end and "
             << recv << " at the receiving end";
          throw PowerFlowError(os.str());
        }
      }
      flow.iterations = iter;
      flow.residual = change;
      flow.p_substation = 0.0;
      flow.q_substation = 0.0;
      for (std::size_t r : network.roots()) {
        flow.p_substation += flow.branch_p(static_cast<Eigen::Index>(r));
        flow.q_substation += flow.branch_q(static_cast<Eigen::Index>(r));
      }
      flow.losses = loss_p.sum();
      return flow;
    }
    flow.residual = change;
  }
  std::ostringstream os;
  os << "sweep on feeder " << network.name() << " did not converge after "
     << options.max_iterations << " iterations (last voltage change " << flow.residual << ")";
  throw PowerFlowError(os.str());
}

namespace {

template <class NetworkAt>
AcSolution solve_ac_impl(std::size_t count, NetworkAt network_at,
                         const std::vector<std::size_t>& offsets, const Eigen::VectorXd& p,
                         const Eigen::VectorXd& q, const SweepOptions& options,
                         std::size_t iteration_tag) {
  AcSolution sol;
  sol.source = FeedbackMode::kAc;
  sol.iteration_tag = iteration_tag;
  for (std::size_t k = 0; k < count; ++k) {
    const FeederNetwork& network = network_at(k);
    const auto off = static_cast<Eigen::Index>(offsets.at(k));
    const auto len = static_cast<Eigen::Index>(network.size());
    if (off + len > p.size() || off + len > q.size()) {
      throw ModelError("injection vectors are shorter than the feeder layout");
    }
    FeederFlow flow = sweep_feeder(network, p.segment(off, len), q.segment(off, len), options);
    sol.sweep_iterations = std::max(sol.sweep_iterations, flow.iterations);
    sol.residual = std::max(sol.residual, flow.residual);
    sol.p_substation.push_back(flow.p_substation);
    sol.losses.push_back(flow.losses);
    sol.v.push_back(std::move(flow.v));
  }
  return sol;
}

}  // namespace

AcSolution solve_ac(const CoupledSystem& system, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q, const SweepOptions& options,
                    std::size_t iteration_tag) {
  std::vector<std::size_t> offsets;
  for (std::size_t k = 0; k < system.feeder_count(); ++k) offsets.push_back(system.offset(k));
  return solve_ac_impl(
      system.feeder_count(), [&](std::size_t k) -> const FeederNetwork& { return system.feeder(k).network(); },
      offsets, p, q, options, iteration_tag);
}

AcSolution solve_ac(const std::vector<FeederNetwork>& networks,
                    const std::vector<std::size_t>& offsets, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& q, const SweepOptions& options,
                    std::size_t iteration_tag) {
  if (offsets.size() != networks.size()) throw ModelError("one offset per feeder network is required");
  return solve_ac_impl(
      networks.size(), [&](std::size_t k) -> const FeederNetwork& { return networks[k]; }, offsets,
      p, q, options, iteration_tag);
}

double slack_output(double total_p0, const Eigen::VectorXd& p_m,
                    const std::vector<double>& p_substation) {
  double drawn = 0.0;
  for (double pl : p_substation) drawn += pl;
  return drawn - p_m.sum() - total_p0;
}

double slack_output(const TransmissionSystem& ts, const Eigen::VectorXd& p_m,
                    const std::vector<double>& p_substation) {
  return slack_output(ts.total_p0(), p_m, p_substation);
}

void SlackAccount::record(double p_slack) {
  if (reference_) throw SolverError("slack reference already recorded");
  reference_ = p_slack;
}

double SlackAccount::reference() const {
  if (!reference_) throw SolverError("slack reference not recorded");
  return *reference_;
}

double slack_residual(const SlackAccount& account, const TransmissionSystem& ts,
                      const Eigen::VectorXd& p_m, const std::vector<double>& p_substation) {
  return slack_residual(account, ts.total_p0(), p_m, p_substation);
}

double slack_residual(const SlackAccount& account, double total_p0, const Eigen::VectorXd& p_m,
                      const std::vector<double>& p_substation) {
  return account.reference() - slack_output(total_p0, p_m, p_substation);
}

}  // namespace tdco
