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

#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "builders.hpp"
#include "tdco/ac_powerflow.hpp"
#include "tdco/case_io.hpp"
#include "tdco/lin_model.hpp"

namespace tdco {
namespace {

// Shared-path resistance by explicit ancestor sets, independent of the
// row-copy construction in build_lindistflow.
Eigen::MatrixXd shared_path(const FeederNetwork& net, bool reactance) {
  const auto n = static_cast<Eigen::Index>(net.size());
  std::vector<std::vector<std::size_t>> ancestors(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    std::optional<std::size_t> cur = i;
    while (cur) {
      ancestors[i].push_back(*cur);
      cur = net.parent(*cur);
    }
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < net.size(); ++i) {
    for (std::size_t j = 0; j < net.size(); ++j) {
      double sum = 0.0;
      for (std::size_t a : ancestors[i]) {
        if (std::find(ancestors[j].begin(), ancestors[j].end(), a) != ancestors[j].end()) {
          sum += reactance ? net.line_into(a).x : net.line_into(a).r;
        }
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sum / net.v0();
    }
  }
  return out;
}

double voltage_error(const FeederNetwork& net, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  const LinearFeederModel model = build_lindistflow(net);
  SweepOptions opts;
  opts.tolerance = 1e-12;
  opts.max_iterations = 500;
  const FeederFlow ac = sweep_feeder(net, p, q, opts);
  return (model.predict(p, q).v - ac.v).cwiseAbs().maxCoeff();
}

FeederNetwork scaled_loads(const FeederNetwork& net, double s) {
  std::vector<FeederNode> nodes = net.nodes();
  for (auto& n : nodes) {
    n.p_load *= s;
    n.q_load *= s;
  }
  return FeederNetwork::build(net.name(), net.base_mva(), net.substation(), net.v0(), nodes, net.lines());
}

TEST(LinDistFlow, ZeroImpedanceFeeder) {
  const FeederNetwork net = FeederNetwork::build(
      "z", 1.0, NodeId(0), 1.02, {{NodeId(1), 0.1, 0.1}, {NodeId(2), 0.2, 0}, {NodeId(3), 0, 0.3}},
      {{NodeId(0), NodeId(1), 0, 0}, {NodeId(1), NodeId(2), 0, 0}, {NodeId(0), NodeId(3), 0, 0}});
  const LinearFeederModel m = build_lindistflow(net);
  EXPECT_TRUE(m.a.isZero(0.0));
  EXPECT_TRUE(m.b.isZero(0.0));
  EXPECT_TRUE(m.c.isApprox(Eigen::VectorXd::Constant(3, 1.02)));
}

TEST(LinDistFlow, SingleLine) {
  const LinearFeederModel m = build_lindistflow(test::line_network(0.01, 0.02));
  EXPECT_DOUBLE_EQ(m.a(0, 0), 0.01);
  EXPECT_DOUBLE_EQ(m.b(0, 0), 0.02);
  EXPECT_DOUBLE_EQ(m.c(0), 1.0);
  EXPECT_EQ(m.m(0), -1.0);
  EXPECT_EQ(m.n(0), 0.0);
  EXPECT_EQ(m.d, 0.0);
}

TEST(LinDistFlow, SingleLineAgreesWithSweepAtSmallInjection) {
  const FeederNetwork net = test::line_network(0.01, 0.02);
  for (double s : {1e-3, -1e-3, 5e-4}) {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, s);
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, -0.5 * s);
    EXPECT_LT(voltage_error(net, p, q), 1e-6) << s;
  }
}

TEST(LinDistFlow, MatchesSharedPathConstruction) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const FeederNetwork net = test::random_network(rng, 2 + trial % 15);
    const LinearFeederModel m = build_lindistflow(net);
    EXPECT_TRUE(m.a.isApprox(shared_path(net, false), 1e-14));
    EXPECT_TRUE(m.b.isApprox(shared_path(net, true), 1e-14));
    Eigen::VectorXd load_p(static_cast<Eigen::Index>(net.size()));
    Eigen::VectorXd load_q(static_cast<Eigen::Index>(net.size()));
    for (std::size_t i = 0; i < net.size(); ++i) {
      load_p(static_cast<Eigen::Index>(i)) = net.nodes()[i].p_load;
      load_q(static_cast<Eigen::Index>(i)) = net.nodes()[i].q_load;
    }
    EXPECT_NEAR(m.d, load_p.sum(), 1e-15);
    const Eigen::VectorXd c = Eigen::VectorXd::Constant(load_p.size(), net.v0()) - m.a * load_p - m.b * load_q;
    EXPECT_LT((m.c - c).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(LinDistFlow, SensitivitiesAreSymmetricPositiveSemidefinite) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const LinearFeederModel m = build_lindistflow(test::random_network(rng, 2 + trial % 20));
    EXPECT_TRUE(m.a == m.a.transpose());
    EXPECT_TRUE(m.b == m.b.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(m.a), eb(m.b);
    EXPECT_GE(ea.eigenvalues().minCoeff(), -1e-12);
    EXPECT_GE(eb.eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(Predict, OffsetAtZero) {
  std::mt19937_64 rng(23);
  const LinearFeederModel m = build_lindistflow(test::random_network(rng, 6));
  const FeederPrediction out = m.predict(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6));
  EXPECT_TRUE(out.v == m.c);
  EXPECT_EQ(out.p_substation, m.d);
}

TEST(Predict, SingleLineInjection) {
  const LinearFeederModel m = build_lindistflow(test::line_network(0.01, 0.02));
  const FeederPrediction out = m.predict(Eigen::VectorXd::Constant(1, 0.1), Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(out.v(0), 1.001, 1e-15);
  EXPECT_NEAR(out.p_substation, -0.1, 1e-15);
}

TEST(Predict, DoublingInjectionDoublesDeviation) {
  std::mt19937_64 rng(24);
  const LinearFeederModel m = build_lindistflow(test::random_network(rng, 8));
  const Eigen::VectorXd p = Eigen::VectorXd::Random(8) * 0.125;
  const Eigen::VectorXd q = Eigen::VectorXd::Random(8) * 0.125;
  const Eigen::VectorXd once = m.predict(p, q).v - m.c;
  const Eigen::VectorXd twice = m.predict(2 * p, 2 * q).v - m.c;
  EXPECT_LT((twice - 2 * once).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Predict, IsLinearInTheInjections) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + trial % 10);
    const LinearFeederModel m = build_lindistflow(test::random_network(rng, static_cast<int>(n)));
    Eigen::VectorXd up(n), uq(n), wp(n), wq(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      up(i) = u(rng);
      uq(i) = u(rng);
      wp(i) = u(rng);
      wq(i) = u(rng);
    }
    const double a = u(rng), b = u(rng);
    const FeederPrediction mix = m.predict(a * up + b * wp, a * uq + b * wq);
    const FeederPrediction pu = m.predict(up, uq);
    const FeederPrediction pw = m.predict(wp, wq);
    EXPECT_LT(((mix.v - m.c) - a * (pu.v - m.c) - b * (pw.v - m.c)).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(mix.p_substation - m.d, a * (pu.p_substation - m.d) + b * (pw.p_substation - m.d), 1e-13);
  }
}

TEST(Predict, DimensionMismatchThrows) {
  const LinearFeederModel m = build_lindistflow(test::line_network(0.01, 0.02));
  EXPECT_THROW(m.predict(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1)), ModelError);
}

TEST(LinDistFlowAccuracy, ErrorDecaysQuadraticallyOnRandomFeeders) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  for (int trial = 0; trial < 40; ++trial) {
    const FeederNetwork net = test::random_network(rng, 3 + trial % 12, 0.0);
    const auto n = static_cast<Eigen::Index>(net.size());
    Eigen::VectorXd p(n), q(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = u(rng);
      q(i) = u(rng);
    }
    const double full = voltage_error(net, p, q);
    const double half = voltage_error(net, 0.5 * p, 0.5 * q);
    EXPECT_GE(full, 3.0 * half) << "trial " << trial << " full " << full << " half " << half;
  }
}

TEST(LinDistFlowAccuracy, Case33bwNominalLoadWithinOneHundredth) {
  const FeederNetwork net = load_feeder(test::data_dir() / "cases/case33bw.json").network();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.size()));
  const double full = voltage_error(net, zero, zero);
  EXPECT_LT(full, 0.01);
  const double half = voltage_error(scaled_loads(net, 0.5), zero, zero);
  EXPECT_GE(full, 3.0 * half);
}

}  // namespace
}  // namespace tdco
