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

#include "tdco/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "tdco/codispatch.hpp"

namespace tdco {

namespace {

enum class Block { kP, kQ, kPm };

struct Variable {
  Block block;
  Eigen::Index index;
  Box box;
  double balance_coef;
  std::string name;
};

double& coord(PrimalState& x, const Variable& v) {
  switch (v.block) {
    case Block::kP:
      return x.p(v.index);
    case Block::kQ:
      return x.q(v.index);
    case Block::kPm:
      break;
  }
  return x.p_m(v.index);
}

double balance(const Problem& problem, const PrimalState& x, double slack_reference) {
  const FlowSnapshot flows = predict_flows(problem, x, 0);
  return slack_reference - slack_output(problem.transmission(), x.p_m, flows.p_substation);
}

bool voltages_ok(const Problem& problem, const PrimalState& x) {
  const FlowSnapshot flows = predict_flows(problem, x, 0);
  const VoltageLimits& lim = problem.limits();
  for (const auto& v : flows.v) {
    if (v.size() && (v.maxCoeff() > lim.v_max || v.minCoeff() < lim.v_min)) return false;
  }
  return true;
}

}  // namespace

double constraint_violation(const Problem& problem, const DeviceStatus& status,
                            const PrimalState& x, double slack_reference) {
  problem.check_layout(x);
  double worst = 0.0;
  auto box_gap = [](double v, const Box& b) { return std::max({0.0, b.lo - v, v - b.hi}); };
  for (Eigen::Index i = 0; i < x.p.size(); ++i) {
    const auto g = static_cast<std::size_t>(i);
    worst = std::max({worst, box_gap(x.p(i), problem.p_box(g, status)),
                      box_gap(x.q(i), problem.q_box(g, status))});
  }
  for (Eigen::Index j = 0; j < x.p_m.size(); ++j) {
    worst = std::max(worst, box_gap(x.p_m(j), problem.generator_box(static_cast<std::size_t>(j), status)));
  }
  const FlowSnapshot flows = predict_flows(problem, x, 0);
  for (const auto& v : flows.v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      worst = std::max({worst, v(i) - problem.limits().v_max, problem.limits().v_min - v(i)});
    }
  }
  return std::max(worst, std::abs(balance(problem, x, slack_reference)));
}

OracleSolution solve_oracle(const Problem& problem, const DeviceStatus& status,
                            double slack_reference, const OracleOptions& options) {
  if (options.points < 2) throw ModelError("oracle needs at least two grid points per dimension");
  const auto n = static_cast<Eigen::Index>(problem.node_count());
  const auto kg = static_cast<Eigen::Index>(problem.generator_count());
  PrimalState x{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(kg)};

  std::vector<Variable> free;
  for (Eigen::Index j = 0; j < kg; ++j) {
    const Box b = problem.generator_box(static_cast<std::size_t>(j), status);
    x.p_m(j) = b.lo;
    if (!b.degenerate()) free.push_back({Block::kPm, j, b, 1.0, "pm[" + std::to_string(j) + "]"});
  }
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    const LinearFeederModel& m = problem.model(k);
    const auto off = static_cast<Eigen::Index>(problem.system().offset(k));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m.size()); ++i) {
      const auto g = static_cast<std::size_t>(off + i);
      const Box pb = problem.p_box(g, status);
      const Box qb = problem.q_box(g, status);
      x.p(off + i) = pb.lo;
      x.q(off + i) = qb.lo;
      if (!pb.degenerate()) free.push_back({Block::kP, off + i, pb, -m.m(i), "p[" + std::to_string(off + i) + "]"});
      if (!qb.degenerate()) free.push_back({Block::kQ, off + i, qb, -m.n(i), "q[" + std::to_string(off + i) + "]"});
    }
  }
  if (static_cast<int>(free.size()) > options.max_free) {
    throw ModelError("oracle instance has " + std::to_string(free.size()) +
                     " free variables, at most " + std::to_string(options.max_free) + " allowed");
  }
  const auto elim_it = std::find_if(free.begin(), free.end(),
                                    [](const Variable& v) { return v.balance_coef != 0.0; });
  if (elim_it == free.end()) throw ModelError("oracle instance has no variable that can absorb the balance");
  const Variable elim = *elim_it;
  free.erase(elim_it);

  const std::size_t d = free.size();
  std::vector<double> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = free[i].box.lo;
    hi[i] = free[i].box.hi;
  }

  OracleSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  const int pts = options.points;
  std::vector<double> center(d);

  for (int level = 0; level < 200; ++level) {
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i) h[i] = (hi[i] - lo[i]) / (pts - 1);

    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= static_cast<std::size_t>(pts);
    bool found = false;
    std::vector<int> at(d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (std::size_t i = 0; i < d; ++i) {
        at[i] = static_cast<int>(rem % static_cast<std::size_t>(pts));
        rem /= static_cast<std::size_t>(pts);
        coord(x, free[i]) = at[i] == pts - 1 ? hi[i] : lo[i] + at[i] * h[i];
      }
      coord(x, elim) = 0.0;
      const double value = -balance(problem, x, slack_reference) / elim.balance_coef;
      if (value < elim.box.lo || value > elim.box.hi) continue;
      coord(x, elim) = value;
      if (!voltages_ok(problem, x)) continue;
      const double f = problem.total_cost(x);
      if (f < best.objective) {
        best.objective = f;
        best.x = x;
        for (std::size_t i = 0; i < d; ++i) center[i] = coord(x, free[i]);
        found = true;
      }
    }
    if (!found && level == 0) throw SolverError("oracle found no feasible grid point");
    best.levels = level + 1;

    double spacing = 0.0;
    for (double hv : h) spacing = std::max(spacing, hv);
    best.spacing = spacing;
    if (spacing < options.resolution) break;

    // Re-centre at the same spacing when the best point sits on a window
    // edge that is not a box edge; otherwise shrink around it.
    bool on_edge = false;
    for (std::size_t i = 0; i < d; ++i) {
      const bool at_lo = center[i] == lo[i] && lo[i] > free[i].box.lo;
      const bool at_hi = center[i] == hi[i] && hi[i] < free[i].box.hi;
      on_edge |= at_lo || at_hi;
    }
    for (std::size_t i = 0; i < d; ++i) {
      const double half = on_edge ? 0.5 * (hi[i] - lo[i]) : options.window * h[i];
      lo[i] = std::max(free[i].box.lo, center[i] - half);
      hi[i] = std::min(free[i].box.hi, center[i] + half);
    }
  }

  for (const auto& v : free) best.variables.push_back(v.name);
  best.variables.push_back(elim.name);
  return best;
}

OracleReport compare_with_oracle(const Problem& problem, const DeviceStatus& status,
                                 double slack_reference, const PrimalState& engine_x,
                                 const OracleOptions& options) {
  OracleReport r;
  r.oracle = solve_oracle(problem, status, slack_reference, options);
  r.engine_x = engine_x;
  r.engine_objective = problem.total_cost(engine_x);
  const double diff = std::abs(r.engine_objective - r.oracle.objective);
  r.relative_gap = std::abs(r.oracle.objective) > 1e-12 ? diff / std::abs(r.oracle.objective) : diff;
  r.max_coordinate_gap = max_abs_diff(engine_x, r.oracle.x);
  r.engine_violation = constraint_violation(problem, status, engine_x, slack_reference);
  return r;
}

std::string OracleReport::to_json() const {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j{
      {"oracle",
       {{"objective", oracle.objective},
        {"variables", oracle.variables},
        {"levels", oracle.levels},
        {"spacing", oracle.spacing},
        {"p", vec(oracle.x.p)},
        {"q", vec(oracle.x.q)},
        {"p_m", vec(oracle.x.p_m)}}},
      {"engine",
       {{"objective", engine_objective},
        {"p", vec(engine_x.p)},
        {"q", vec(engine_x.q)},
        {"p_m", vec(engine_x.p_m)},
        {"violation", engine_violation}}},
      {"relative_gap", relative_gap},
      {"max_coordinate_gap", max_coordinate_gap}};
  return j.dump(2);
}

}  // namespace tdco
