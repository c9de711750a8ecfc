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

#include <cmath>
#include <random>

#include "builders.hpp"
#include "tdco/codispatch.hpp"

namespace tdco {
namespace {

Problem generators_only(const std::vector<double>& costs, double demand) {
  return Problem(attach_feeders(test::generator_system(costs, demand), {}), VoltageLimits{});
}

PrimalState generator_state(double p_m) {
  return PrimalState{Eigen::VectorXd(0), Eigen::VectorXd(0), Eigen::VectorXd::Constant(1, p_m)};
}

TEST(ProjectBox, Examples) {
  EXPECT_EQ(project_box(1.5, 0.0, 1.0), 1.0);
  EXPECT_EQ(project_box(-0.5, 0.0, 1.0), 0.0);
  EXPECT_EQ(project_box(0.25, 0.0, 1.0), 0.25);
  EXPECT_EQ(project_box(3.0, 2.0, 2.0), 2.0);
  EXPECT_THROW(project_box(0.0, 1.0, 0.0), ModelError);
}

TEST(ProjectBox, IdempotentAndNonexpansive) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 2000; ++i) {
    double lo = u(rng), hi = u(rng);
    if (lo > hi) std::swap(lo, hi);
    const double a = u(rng), b = u(rng);
    const double pa = project_box(a, lo, hi);
    EXPECT_EQ(project_box(pa, lo, hi), pa);
    EXPECT_LE(std::abs(pa - project_box(b, lo, hi)), std::abs(a - b));
  }
}

TEST(Lagrangian, GeneratorOnlyExamples) {
  const Problem problem = generators_only({1.0}, 2.0);
  const SlackAccount zero(0.0);
  DualState y = DualState::zeros(problem.system());
  EXPECT_DOUBLE_EQ(eval_lagrangian(problem, generator_state(0.0), y, zero, 0.0), 0.0);
  // C = 1, r = 1 - 2 = -1, lambda r = 9.
  y.lambda = -9.0;
  EXPECT_DOUBLE_EQ(eval_lagrangian(problem, generator_state(1.0), y, zero, 0.0), 10.0);
  // Regularization subtracts eta lambda^2 / 2.
  EXPECT_DOUBLE_EQ(eval_lagrangian(problem, generator_state(1.0), y, zero, 0.5), 10.0 - 20.25);
}

TEST(Lagrangian, NondecreasingInMuWhenLimitsAreViolated) {
  const Problem problem = test::toy_problem({.p_load = 0.0, .limits = {0.9, 1.0}});
  PrimalState x{Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  const SlackAccount zero(0.0);
  DualState y = DualState::zeros(problem.system());
  double last = eval_lagrangian(problem, x, y, zero, 0.0);
  for (int i = 1; i <= 10; ++i) {
    y.mu[0](0) = 0.1 * i;
    const double value = eval_lagrangian(problem, x, y, zero, 0.0);
    EXPECT_GT(value, last);
    last = value;
  }
}

TEST(GradPrimal, ToyExample) {
  const Problem problem = test::toy_problem({.a_p = 2.0, .a_q = 0.5});
  const PrimalState x{Eigen::VectorXd::Constant(1, 0.1), Eigen::VectorXd::Constant(1, -0.2),
                      Eigen::VectorXd::Constant(1, 0.3)};
  DualState y = DualState::zeros(problem.system());
  y.lambda = -0.5;
  y.mu[0] << 0.25, 0.0;
  const PrimalGradient g = grad_primal(problem, x, y);
  // a = 0.01, b = 0.02 on the single line, m = -1, n = 0.
  EXPECT_NEAR(g.p(0), 2 * 2.0 * 0.1 - 0.5 + 0.01 * 0.25, 1e-15);
  EXPECT_NEAR(g.q(0), 2 * 0.5 * -0.2 + 0.02 * 0.25, 1e-15);
  EXPECT_NEAR(g.p_m(0), 2 * 0.3 - 0.5, 1e-15);

  const PrimalGradient base = grad_primal(problem, x, y, true);
  EXPECT_NEAR(base.p(0), 2 * 2.0 * 0.1 + 0.01 * 0.25, 1e-15);
  EXPECT_EQ(base.p_m(0), g.p_m(0));
}

// Central differences of the Lagrangian reproduce the analytic gradient.
TEST(GradPrimal, MatchesFiniteDifferences) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Problem problem = test::random_problem(rng, 2, 6);
    const PrimalState x = test::random_primal(rng, problem, 0.05);
    const DualState y = test::random_dual(rng, problem, 2.0);
    const SlackAccount slack(0.3);
    const PrimalGradient g = grad_primal(problem, x, y);
    const double h = 1e-4;
    auto check = [&](Eigen::VectorXd PrimalState::*block, const Eigen::VectorXd& analytic) {
      for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        PrimalState up = x, dn = x;
        (up.*block)(i) += h;
        (dn.*block)(i) -= h;
        const double fd = (eval_lagrangian(problem, up, y, slack, 0.1) -
                           eval_lagrangian(problem, dn, y, slack, 0.1)) /
                          (2 * h);
        EXPECT_LE(std::abs(fd - analytic(i)), 1e-6 * std::max(1e-4, std::abs(analytic(i))))
            << "trial " << trial << " coordinate " << i;
      }
    };
    check(&PrimalState::p, g.p);
    check(&PrimalState::q, g.q);
    check(&PrimalState::p_m, g.p_m);
  }
}

TEST(GradDual, SignsFollowTheConstraints) {
  const Problem problem = test::toy_problem({.limits = {0.95, 1.0}});
  const PrimalState x{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.25)};
  DualState y = DualState::zeros(problem.system());
  FlowSnapshot flows = predict_flows(problem, x, 3);
  const SlackAccount zero(0.0);

  flows.v[0](0) = 1.02;
  DualGradient g = grad_dual(problem, x, y, flows, zero, 0.0, 3);
  EXPECT_NEAR(g.mu[0](0), 0.02, 1e-15);
  EXPECT_LT(g.mu[0](1), 0.0);

  flows.v[0](0) = 0.9;
  g = grad_dual(problem, x, y, flows, zero, 0.0, 3);
  EXPECT_LT(g.mu[0](0), 0.0);
  EXPECT_NEAR(g.mu[0](1), 0.05, 1e-15);

  flows.v[0](0) = 1.0;
  g = grad_dual(problem, x, y, flows, zero, 0.0, 3);
  EXPECT_EQ(g.mu[0](0), 0.0);

  // Balanced: P_M + p = demand + feeder load.
  EXPECT_NEAR(g.lambda, 0.0, 1e-15);
  y.lambda = 2.0;
  g = grad_dual(problem, x, y, flows, zero, 0.5, 3);
  EXPECT_NEAR(g.lambda, -1.0, 1e-15);
}

TEST(GradDual, RejectsStaleFeedback) {
  const Problem problem = test::toy_problem();
  const PrimalState x{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  const FlowSnapshot flows = predict_flows(problem, x, 4);
  const DualState y = DualState::zeros(problem.system());
  try {
    grad_dual(problem, x, y, flows, SlackAccount(0.0), 0.0, 5);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("stale feedback"), std::string::npos);
  }
}

// The interior saddle point of the toy problem: 2 P = 2 p = -lambda and
// P + p = 0.25, so P = p = 0.125 and lambda = -0.25 with mu = 0.
TEST(Step, InteriorSaddleIsAFixedPoint) {
  const Problem problem = test::toy_problem();
  const PrimalState x{Eigen::VectorXd::Constant(1, 0.125), Eigen::VectorXd::Zero(1),
                      Eigen::VectorXd::Constant(1, 0.125)};
  DualState y = DualState::zeros(problem.system());
  y.lambda = -0.25;
  const SlackAccount zero(0.0);
  SolverConfig config;
  config.epsilon = 0.05;
  for (StepOrder order : {StepOrder::kSequential, StepOrder::kJacobi}) {
    config.order = order;
    const StepResult out = primal_dual_step(problem, DeviceStatus::from_system(problem.system()), x, y,
                                            predict_flows(problem, x, 9), zero, config, 9);
    EXPECT_LT(max_abs_diff(out.x, x), 1e-12);
    EXPECT_LT(max_abs_diff(out.y, y), 1e-12);
    EXPECT_EQ(out.flows.iteration_tag, 10u);
  }
}

TEST(Step, SingleGeneratorConverges) {
  const Problem problem = generators_only({1.0}, 2.0);
  const DeviceStatus status = DeviceStatus::from_system(problem.system());
  const SlackAccount zero(0.0);
  SolverConfig config;
  config.epsilon = 0.1;
  PrimalState x = generator_state(0.0);
  DualState y = DualState::zeros(problem.system());
  FlowSnapshot flows = predict_flows(problem, x, 0);
  for (std::size_t t = 0; t < 3000; ++t) {
    StepResult out = primal_dual_step(problem, status, x, y, flows, zero, config, t);
    x = std::move(out.x);
    y = std::move(out.y);
    flows = std::move(out.flows);
  }
  EXPECT_NEAR(x.p_m(0), 2.0, 1e-10);
  EXPECT_NEAR(y.lambda, -4.0, 1e-10);
}

TEST(Step, MuStaysNonnegative) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Problem problem = test::random_problem(rng, 2, 5, {0.999, 1.001});
    const DeviceStatus status = DeviceStatus::from_system(problem.system());
    PrimalState x = problem.project(test::random_primal(rng, problem, 0.05), status);
    DualState y = test::random_dual(rng, problem, 0.01);
    FlowSnapshot flows = predict_flows(problem, x, 0);
    SolverConfig config;
    config.epsilon = 0.5;
    for (std::size_t t = 0; t < 50; ++t) {
      StepResult out = primal_dual_step(problem, status, x, y, flows, SlackAccount(0.0), config, t);
      for (const auto& m : out.y.mu) EXPECT_GE(m.minCoeff(), 0.0);
      for (Eigen::Index i = 0; i < out.x.p.size(); ++i) {
        EXPECT_TRUE(problem.p_box(static_cast<std::size_t>(i), status).contains(out.x.p(i)));
      }
      x = std::move(out.x);
      y = std::move(out.y);
      flows = std::move(out.flows);
    }
  }
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), ModelError);
  c = {};
  c.eta = -1.0;
  EXPECT_THROW(c.validate(), ModelError);
  c = {};
  c.max_iterations = -1;
  EXPECT_THROW(c.validate(), ModelError);
}

}  // namespace
}  // namespace tdco
