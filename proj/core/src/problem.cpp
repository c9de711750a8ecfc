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

#include "tdco/problem.hpp"

#include <algorithm>
#include <cmath>

namespace tdco {

DualState DualState::zeros(const CoupledSystem& system) {
  DualState y;
  for (const auto& f : system.feeders()) {
    y.mu.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * f.size())));
  }
  return y;
}

double max_abs_diff(const PrimalState& a, const PrimalState& b) {
  if (a.p.size() != b.p.size() || a.q.size() != b.q.size() || a.p_m.size() != b.p_m.size()) {
    throw ModelError("primal states have different layouts");
  }
  double out = 0.0;
  if (a.p.size() > 0) {
    out = std::max(out, (a.p - b.p).cwiseAbs().maxCoeff());
    out = std::max(out, (a.q - b.q).cwiseAbs().maxCoeff());
  }
  if (a.p_m.size() > 0) out = std::max(out, (a.p_m - b.p_m).cwiseAbs().maxCoeff());
  return out;
}

double max_abs_diff(const DualState& a, const DualState& b) {
  if (a.mu.size() != b.mu.size()) throw ModelError("dual states have different layouts");
  double out = std::abs(a.lambda - b.lambda);
  for (std::size_t k = 0; k < a.mu.size(); ++k) {
    if (a.mu[k].size() != b.mu[k].size()) throw ModelError("dual states have different layouts");
    if (a.mu[k].size() > 0) out = std::max(out, (a.mu[k] - b.mu[k]).cwiseAbs().maxCoeff());
  }
  return out;
}

CostTable CostTable::from_system(const CoupledSystem& system) {
  CostTable t;
  for (const auto& g : system.transmission().generators()) {
    t.generator.push_back(ScalarCost::quadratic(g.cost));
  }
  t.der_p.resize(system.node_count());
  t.der_q.resize(system.node_count());
  for (std::size_t k = 0; k < system.feeder_count(); ++k) {
    const auto& f = system.feeder(k);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (const Der* der = f.der_at(i)) {
        const auto g = system.global_index(k, i);
        t.der_p[g] = ScalarCost::quadratic(der->a_p);
        t.der_q[g] = ScalarCost::quadratic(der->a_q);
      }
    }
  }
  return t;
}

DeviceStatus DeviceStatus::from_system(const CoupledSystem& system) {
  DeviceStatus s;
  for (const auto& g : system.transmission().generators()) s.generator_online.push_back(g.online);
  s.der_scale.assign(system.node_count(), 1.0);
  return s;
}

Problem::Problem(CoupledSystem system, VoltageLimits limits)
    : system_(std::move(system)), limits_(limits) {
  limits_.validate();
  for (const auto& f : system_.feeders()) models_.push_back(build_lindistflow(f.network()));
  costs_ = CostTable::from_system(system_);
}

Problem::Problem(CoupledSystem system, std::vector<LinearFeederModel> models, VoltageLimits limits,
                 CostTable costs)
    : system_(std::move(system)),
      models_(std::move(models)),
      limits_(limits),
      costs_(std::move(costs)) {
  limits_.validate();
  if (models_.size() != system_.feeder_count()) {
    throw ModelError("one linear model per feeder is required");
  }
  for (std::size_t k = 0; k < models_.size(); ++k) {
    if (models_[k].size() != system_.feeder(k).size()) {
      throw ModelError("linear model " + std::to_string(k) + " does not match its feeder size");
    }
  }
  if (costs_.generator.size() != system_.generator_count() ||
      costs_.der_p.size() != system_.node_count() || costs_.der_q.size() != system_.node_count()) {
    throw ModelError("cost table does not match the system layout");
  }
}

Box Problem::p_box(std::size_t global, const DeviceStatus& status) const {
  const DerSlot s = system_.slot(global);
  const Der* der = system_.feeder(s.feeder).der_at(s.node);
  if (!der) return {};
  const Box b = der->p_box();
  return {status.der_scale[global] * b.lo, status.der_scale[global] * b.hi};
}

Box Problem::q_box(std::size_t global, const DeviceStatus& status) const {
  const DerSlot s = system_.slot(global);
  const Der* der = system_.feeder(s.feeder).der_at(s.node);
  if (!der) return {};
  const Box b = der->q_box();
  return {status.der_scale[global] * b.lo, status.der_scale[global] * b.hi};
}

Box Problem::generator_box(std::size_t k, const DeviceStatus& status) const {
  const Generator& g = transmission().generators().at(k);
  if (!status.generator_online.at(k)) return {};
  return {g.p_min, g.p_max};
}

PrimalState Problem::project(const PrimalState& x, const DeviceStatus& status) const {
  check_layout(x);
  PrimalState out = x;
  for (Eigen::Index i = 0; i < out.p.size(); ++i) {
    const auto g = static_cast<std::size_t>(i);
    const Box pb = p_box(g, status);
    const Box qb = q_box(g, status);
    out.p(i) = std::clamp(out.p(i), pb.lo, pb.hi);
    out.q(i) = std::clamp(out.q(i), qb.lo, qb.hi);
  }
  for (Eigen::Index k = 0; k < out.p_m.size(); ++k) {
    const Box b = generator_box(static_cast<std::size_t>(k), status);
    out.p_m(k) = std::clamp(out.p_m(k), b.lo, b.hi);
  }
  return out;
}

void Problem::check_layout(const PrimalState& x) const {
  const auto n = static_cast<Eigen::Index>(node_count());
  if (x.p.size() != n || x.q.size() != n ||
      x.p_m.size() != static_cast<Eigen::Index>(generator_count())) {
    throw ModelError("primal state does not match the problem layout");
  }
}

void Problem::check_layout(const DualState& y) const {
  if (y.mu.size() != feeder_count()) throw ModelError("dual state needs one mu block per feeder");
  for (std::size_t k = 0; k < y.mu.size(); ++k) {
    if (y.mu[k].size() != static_cast<Eigen::Index>(2 * system_.feeder(k).size())) {
      throw ModelError("mu block " + std::to_string(k) + " must have 2 N_k entries");
    }
  }
}

double Problem::total_cost(const PrimalState& x) const {
  check_layout(x);
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.p_m.size(); ++k) {
    total += costs_.generator[static_cast<std::size_t>(k)].value(x.p_m(k));
  }
  for (Eigen::Index i = 0; i < x.p.size(); ++i) {
    const auto g = static_cast<std::size_t>(i);
    total += costs_.der_p[g].value(x.p(i)) + costs_.der_q[g].value(x.q(i));
  }
  return total;
}

}  // namespace tdco
