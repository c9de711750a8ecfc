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

#include "tdco/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace tdco {

namespace {

double spectral_norm(const Eigen::MatrixXd& g) {
  if (g.size() == 0) return 0.0;
  const Eigen::MatrixXd gram =
      g.rows() <= g.cols() ? Eigen::MatrixXd(g * g.transpose()) : Eigen::MatrixXd(g.transpose() * g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

struct Coordinate {
  Eigen::Index column;
  const ScalarCost* cost;
};

}  // namespace

Eigen::MatrixXd coupling_matrix(const Problem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.node_count());
  const auto kg = static_cast<Eigen::Index>(problem.generator_count());
  const auto rows = 1 + 2 * n;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(rows, 2 * n + kg);

  // d r / d P_M = 1 and d r / d p_k = -M_k, d r / d q_k = -N_k.
  g.block(0, 2 * n, 1, kg).setOnes();
  Eigen::Index row = 1;
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    const LinearFeederModel& m = problem.model(k);
    const auto off = static_cast<Eigen::Index>(problem.system().offset(k));
    const auto nk = static_cast<Eigen::Index>(m.size());
    g.block(0, off, 1, nk) = -m.m.transpose();
    g.block(0, n + off, 1, nk) = -m.n.transpose();
    g.block(row, off, nk, nk) = m.a;
    g.block(row, n + off, nk, nk) = m.b;
    g.block(row + nk, off, nk, nk) = -m.a;
    g.block(row + nk, n + off, nk, nk) = -m.b;
    row += 2 * nk;
  }
  return g;
}

StepsizeReport check_stepsize(const Problem& problem, const DeviceStatus& status, double eta) {
  if (eta < 0.0) throw ModelError("eta must be non-negative");
  const auto n = static_cast<Eigen::Index>(problem.node_count());
  const auto& costs = problem.costs();

  std::vector<Coordinate> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(i);
    if (!problem.p_box(g, status).degenerate()) free.push_back({i, &costs.der_p[g]});
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(i);
    if (!problem.q_box(g, status).degenerate()) free.push_back({n + i, &costs.der_q[g]});
  }
  for (std::size_t j = 0; j < problem.generator_count(); ++j) {
    if (!problem.generator_box(j, status).degenerate()) {
      free.push_back({2 * n + static_cast<Eigen::Index>(j), &costs.generator[j]});
    }
  }

  double modulus = std::numeric_limits<double>::infinity();
  double curvature = 0.0;
  for (const Coordinate& c : free) {
    if (!c.cost->modulus() || !c.cost->curvature_bound()) {
      throw ModelError("cost at column " + std::to_string(c.column) +
                       " has no strong-convexity modulus or curvature bound");
    }
    modulus = std::min(modulus, *c.cost->modulus());
    curvature = std::max(curvature, *c.cost->curvature_bound());
  }
  if (free.empty()) modulus = 0.0;

  const Eigen::MatrixXd full = coupling_matrix(problem);
  Eigen::MatrixXd g(full.rows(), static_cast<Eigen::Index>(free.size()));
  for (std::size_t c = 0; c < free.size(); ++c) {
    g.col(static_cast<Eigen::Index>(c)) = full.col(free[c].column);
  }

  StepsizeReport out;
  out.advisory = eta == 0.0;
  out.s = out.advisory ? modulus : std::min(modulus, eta);
  out.coupling_norm = spectral_norm(g);
  out.l = std::max(curvature, eta) + out.coupling_norm;
  out.bound = out.l > 0.0 ? 2.0 * out.s / (out.l * out.l) : 0.0;

  Eigen::Index row = 1;
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    const auto off = static_cast<Eigen::Index>(problem.system().offset(k));
    const auto nk = static_cast<Eigen::Index>(problem.system().feeder(k).size());
    std::vector<Eigen::Index> cols;
    for (std::size_t c = 0; c < free.size(); ++c) {
      const Eigen::Index col = free[c].column;
      const Eigen::Index local = col < n ? col : col - n;
      if (col < 2 * n && local >= off && local < off + nk) cols.push_back(static_cast<Eigen::Index>(c));
    }
    Eigen::MatrixXd gk(1 + 2 * nk, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto cc = static_cast<Eigen::Index>(c);
      gk(0, cc) = g(0, cols[c]);
      gk.block(1, cc, 2 * nk, 1) = g.block(row, cols[c], 2 * nk, 1);
    }
    out.feeder_coupling.push_back(spectral_norm(gk));
    row += 2 * nk;
  }
  return out;
}

}  // namespace tdco
