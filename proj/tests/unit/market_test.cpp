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
#include <type_traits>

#include <json.hpp>

#include "builders.hpp"
#include "tdco/market.hpp"

namespace tdco {
namespace {

Der der_box(double p_lo, double p_hi, double q_lo, double q_hi) {
  Der d;
  d.node = NodeId(1);
  d.p_min = p_lo;
  d.p_max = p_hi;
  d.q_min = q_lo;
  d.q_max = q_hi;
  return d;
}

TEST(DerAgent, GradientStep) {
  DerAgent a("u", 0, 0, 0, der_box(0.0, 1.0, -1.0, 1.0), ScalarCost::quadratic(1.0),
             ScalarCost::quadratic(0.5), 0.1, 0.0);
  a.gradient_step(0.3, -0.2, 0.5);
  EXPECT_DOUBLE_EQ(a.p(), 0.0);  // 0.1 - 0.5 (0.2 + 0.3) clamped at 0
  EXPECT_DOUBLE_EQ(a.q(), 0.1);
  a.gradient_step(-1.0, 0.0, 0.5);
  EXPECT_DOUBLE_EQ(a.p(), 0.5);
  EXPECT_DOUBLE_EQ(a.q(), 0.05);
}

TEST(DerAgent, BestResponse) {
  DerAgent a("u", 0, 0, 0, der_box(0.0, 1.0, -0.1, 0.1), ScalarCost::quadratic(1.0),
             ScalarCost::quadratic(0.5), 0.0, 0.0);
  a.best_response(-0.4, -0.05);
  EXPECT_DOUBLE_EQ(a.p(), 0.2);
  EXPECT_DOUBLE_EQ(a.q(), 0.05);
  a.best_response(0.4, -1.0);
  EXPECT_DOUBLE_EQ(a.p(), 0.0);
  EXPECT_DOUBLE_EQ(a.q(), 0.1);

  DerAgent odd("v", 0, 0, 0, der_box(0.0, 1.0, 0.0, 0.0),
               ScalarCost::custom([](double x) { return x * x * x * x; }, [](double x) { return 4 * x * x * x; }),
               ScalarCost::quadratic(1.0), 0.0, 0.0);
  EXPECT_THROW(odd.best_response(0.0, 0.0), ModelError);
}

TEST(DerAgent, CapacityScaling) {
  DerAgent a("u", 0, 0, 0, der_box(0.0, 1.0, -1.0, 1.0), ScalarCost::quadratic(1.0),
             ScalarCost::quadratic(1.0), 0.8, -0.8);
  a.scale_capacity(0.5);
  EXPECT_DOUBLE_EQ(a.p_box().hi, 0.5);
  EXPECT_DOUBLE_EQ(a.p(), 0.5);
  EXPECT_DOUBLE_EQ(a.q(), -0.5);
  EXPECT_THROW(a.scale_capacity(0.0), ModelError);
}

TEST(GeneratorAgent, StepAndOutage) {
  Generator g;
  g.p_min = 0.0;
  g.p_max = 2.0;
  GeneratorAgent a("gen:1", 0, g, ScalarCost::quadratic(1.0), 1.0);
  a.step(-1.0, 0.1);
  EXPECT_DOUBLE_EQ(a.p_m(), 0.9);
  a.step(-100.0, 0.1);
  EXPECT_DOUBLE_EQ(a.p_m(), 2.0);
  a.go_offline();
  EXPECT_FALSE(a.online());
  a.step(-100.0, 0.1);
  EXPECT_EQ(a.p_m(), 0.0);
}

TEST(Signals, SingleLineExample) {
  const Problem problem = test::toy_problem();
  std::vector<Eigen::VectorXd> mu{Eigen::Vector2d(0.25, 0.0)};
  const IncentiveSignals s = compute_signals(problem.models(), -0.5, -0.5, mu, 4);
  EXPECT_DOUBLE_EQ(s.lambda, -0.5);
  EXPECT_DOUBLE_EQ(s.alpha[0](0), -0.5 + 0.01 * 0.25);
  EXPECT_DOUBLE_EQ(s.beta[0](0), 0.02 * 0.25);
  EXPECT_EQ(s.iteration_tag, 4u);

  const IncentiveSignals base = compute_signals(problem.models(), -0.5, 0.0, mu, 4);
  EXPECT_DOUBLE_EQ(base.alpha[0](0), 0.01 * 0.25);
  EXPECT_DOUBLE_EQ(base.lambda, -0.5);
  EXPECT_THROW(compute_signals(problem.models(), 0, 0, {}, 0), ModelError);
}

TEST(Signals, AgreeWithTheLagrangianGradient) {
  std::mt19937_64 rng(71);
  const Problem problem = test::random_problem(rng, 3, 6);
  const PrimalState x = test::random_primal(rng, problem, 0.02);
  const DualState y = test::random_dual(rng, problem, 1.0);
  const PrimalGradient g = grad_primal(problem, x, y);
  const IncentiveSignals s = compute_signals(problem.models(), y.lambda, y.lambda, y.mu, 0);
  for (std::size_t i = 0; i < problem.node_count(); ++i) {
    const DerSlot slot = problem.system().slot(i);
    const auto ii = static_cast<Eigen::Index>(i);
    const double price = s.alpha[slot.feeder](static_cast<Eigen::Index>(slot.node));
    EXPECT_EQ(g.p(ii), problem.costs().der_p[i].gradient(x.p(ii)) + price);
  }
}

// Lockstep comparison of the two engines.
double max_deviation(const Problem& problem, SolverConfig config, int iterations) {
  const DeviceStatus status = DeviceStatus::from_system(problem.system());
  const PrimalState x0 = make_initial_primal(problem, status, {});
  const DualState y0 = make_initial_dual(problem, {});
  CoreEngine core(problem, config, x0, y0);
  MarketEngine market(problem, config, x0, y0);
  double worst = 0.0;
  for (int t = 0; t < iterations; ++t) {
    core.step(static_cast<std::size_t>(t));
    market.step(static_cast<std::size_t>(t));
    worst = std::max({worst, max_abs_diff(core.primal(), market.primal()),
                      max_abs_diff(core.dual(), market.dual())});
  }
  return worst;
}

TEST(MarketEngine, TracksTheCentralizedIterationLinear) {
  std::mt19937_64 rng(72);
  const Problem problem = test::random_problem(rng, 3, 8, {0.999, 1.0005});
  SolverConfig config;
  config.epsilon = 0.05;
  EXPECT_LT(max_deviation(problem, config, 1000), 1e-12);
}

TEST(MarketEngine, TracksTheCentralizedIterationAc) {
  std::mt19937_64 rng(73);
  const Problem problem = test::random_problem(rng, 2, 8, {0.999, 1.0005});
  SolverConfig config;
  config.epsilon = 0.05;
  config.feedback = FeedbackMode::kAc;
  EXPECT_LT(max_deviation(problem, config, 1000), 1e-12);
}

TEST(MarketEngine, FeederWithoutDers) {
  auto ts = test::host_system(1, 1.0, 2.0, -0.3);
  auto bare = DistributionFeeder::build("bare", BusId(3), test::line_network(0.01, 0.01, 1.0, 0.1, 0.05), {});
  const Problem problem(attach_feeders(std::move(ts), {std::move(bare)}), VoltageLimits{});
  SolverConfig config;
  config.epsilon = 0.1;
  EXPECT_LT(max_deviation(problem, config, 200), 1e-12);
  const SolveResult r = run_market(problem, config);
  EXPECT_EQ(r.status, SolveStatus::kConverged);
}

TEST(MarketEngine, BestResponseReachesTheGradientDispatch) {
  const Problem problem = test::toy_problem({.a_p = 2.0, .a_q = 0.5});
  SolverConfig config;
  config.epsilon = 0.05;
  config.max_iterations = 20000;
  config.slack_reference = 0.0;
  const SolveResult grad = run_market(problem, config);
  MarketOptions options;
  options.mode = UserMode::kBestResponse;
  const SolveResult best = run_market(problem, config, {}, {}, options);
  ASSERT_EQ(grad.status, SolveStatus::kConverged);
  ASSERT_EQ(best.status, SolveStatus::kConverged);
  EXPECT_LT(max_abs_diff(grad.x, best.x), 1e-5);
  EXPECT_NEAR(grad.y.lambda, best.y.lambda, 1e-5);
}

TEST(MarketEngine, RejectsJacobiOrder) {
  const Problem problem = test::toy_problem();
  SolverConfig config;
  config.order = StepOrder::kJacobi;
  EXPECT_THROW(run_market(problem, config), ModelError);
}

TEST(MarketEngine, DroppedReportAbortsTheRound) {
  const Problem problem = test::toy_problem();
  SolverConfig config;
  MarketOptions options;
  options.faults = [](const AgentMessage& m) {
    return m.kind == MessageKind::kSetpointReport && m.iteration_tag == 3 && m.sender.starts_with("der:")
               ? FaultAction::kDrop
               : FaultAction::kDeliver;
  };
  try {
    run_market(problem, config, {}, {}, options);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("iteration 2"), std::string::npos) << what;
    EXPECT_NE(what.find("dropped setpoint-report from der:toy:1"), std::string::npos) << what;
  }
}

TEST(MarketEngine, DelayedBroadcastAbortsTheRound) {
  const Problem problem = test::toy_problem();
  SolverConfig config;
  MarketOptions options;
  options.faults = [](const AgentMessage& m) {
    return m.kind == MessageKind::kSignalBroadcast && m.iteration_tag == 5 ? FaultAction::kDelay
                                                                          : FaultAction::kDeliver;
  };
  EXPECT_THROW(run_market(problem, config, {}, {}, options), SolverError);
}

TEST(MessageBus, TagMismatchIsRejected) {
  MessageBus bus;
  bus.post({MessageKind::kSetpointReport, "gen:1", 1, GeneratorReport{0, 1.0}});
  EXPECT_THROW(bus.collect(MessageKind::kSetpointReport, 2), SolverError);
}

TEST(MessageBus, DeliversInPostingOrderByKind) {
  MessageBus bus;
  bus.post({MessageKind::kSetpointReport, "a", 0, GeneratorReport{0, 1.0}});
  bus.post({MessageKind::kDualUpdate, "op", 0, DualUpdate{}});
  bus.post({MessageKind::kSetpointReport, "b", 0, GeneratorReport{1, 2.0}});
  const auto reports = bus.collect(MessageKind::kSetpointReport, 0);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].sender, "a");
  EXPECT_EQ(reports[1].sender, "b");
  EXPECT_EQ(bus.collect(MessageKind::kDualUpdate, 0).size(), 1u);
  EXPECT_EQ(bus.delivered(), 3u);
}

TEST(MessageBus, DelayedMessagesArriveAfterFlush) {
  MessageBus bus;
  bool first = true;
  bus.set_fault_injector([&](const AgentMessage&) {
    const bool delay = first;
    first = false;
    return delay ? FaultAction::kDelay : FaultAction::kDeliver;
  });
  bus.post({MessageKind::kDualUpdate, "op", 0, DualUpdate{}});
  EXPECT_THROW(bus.collect(MessageKind::kDualUpdate, 0), SolverError);
  bus.flush();
  EXPECT_EQ(bus.collect(MessageKind::kDualUpdate, 0).size(), 1u);
}

// Each round reads: broadcast, setpoint reports, pf-results, dual update;
// every message of a round carries the same tag except the broadcast,
// which prices the previous state.
TEST(MarketEngine, RoundsAreAtomic) {
  std::mt19937_64 rng(74);
  const Problem problem = test::random_problem(rng, 2, 3);
  SolverConfig config;
  const DeviceStatus status = DeviceStatus::from_system(problem.system());
  MarketEngine engine(problem, config, make_initial_primal(problem, status, {}), make_initial_dual(problem, {}));
  engine.bus().keep_log(true);
  const std::size_t reports = problem.node_count() + problem.generator_count();
  for (std::size_t t = 0; t < 4; ++t) engine.step(t);
  const auto& log = engine.bus().log();
  const std::size_t per_round = 1 + reports + problem.feeder_count() + 1;
  ASSERT_EQ(log.size(), 4 * per_round);
  for (std::size_t t = 0; t < 4; ++t) {
    const std::size_t base = t * per_round;
    EXPECT_EQ(log[base].kind, MessageKind::kSignalBroadcast);
    EXPECT_EQ(log[base].iteration_tag, t);
    for (std::size_t i = 1; i < per_round; ++i) EXPECT_EQ(log[base + i].iteration_tag, t + 1);
    for (std::size_t i = 1; i <= reports; ++i) EXPECT_EQ(log[base + i].kind, MessageKind::kSetpointReport);
    for (std::size_t i = reports + 1; i < per_round - 1; ++i) EXPECT_EQ(log[base + i].kind, MessageKind::kPfResult);
    EXPECT_EQ(log[base + per_round - 1].kind, MessageKind::kDualUpdate);
  }
}

TEST(AgentMessage, JsonDump) {
  const AgentMessage m{MessageKind::kSetpointReport, "gen:2", 7, GeneratorReport{1, 0.5}};
  const auto j = nlohmann::json::parse(m.to_json());
  EXPECT_EQ(j["kind"], "setpoint-report");
  EXPECT_EQ(j["sender"], "gen:2");
  EXPECT_EQ(j["iteration_tag"], 7);
  EXPECT_EQ(j["payload"]["p_m"], 0.5);
  EXPECT_EQ(to_string(MessageKind::kPfResult), "pf-result");
}

// The operator's view carries network data only.
template <typename T>
concept ExposesDers = requires(const T& t) { t.ders; };
template <typename T>
concept ExposesCosts = requires(const T& t) { t.costs; };

TEST(OperatorView, HoldsNoPrivateData) {
  static_assert(!ExposesDers<OperatorView>);
  static_assert(!ExposesCosts<OperatorView>);
  static_assert(std::is_same_v<decltype(OperatorView::networks), std::vector<FeederNetwork>>);
  std::mt19937_64 rng(75);
  const Problem problem = test::random_problem(rng, 2, 4);
  const OperatorView view = OperatorView::from_problem(problem);
  // Exactly seven members; a new field breaks this binding.
  const auto& [networks, models, offsets, node_count, generator_count, total_p0, limits] = view;
  EXPECT_EQ(networks.size(), 2u);
  EXPECT_EQ(models.size(), 2u);
  EXPECT_EQ(offsets[1], problem.system().offset(1));
  EXPECT_EQ(node_count, problem.node_count());
  EXPECT_EQ(generator_count, 2u);
  EXPECT_EQ(total_p0, -0.5);
  EXPECT_EQ(limits.v_max, problem.limits().v_max);
}

}  // namespace
}  // namespace tdco
