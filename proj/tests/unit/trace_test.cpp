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
#include <limits>
#include <random>
#include <sstream>

#include "builders.hpp"
#include "tdco/compare.hpp"
#include "tdco/trace.hpp"

namespace tdco {
namespace {

TEST(FormatNumber, RoundTripsAndMarksNonFinite) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-2.0), "-2");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "NA");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "NA");
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 20) - 10);
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(DeepestNode, PicksTheLargestPathImpedanceLeaf) {
  const FeederNetwork net = FeederNetwork::build(
      "t", 1.0, NodeId(0), 1.0, {{NodeId(1)}, {NodeId(2)}, {NodeId(3)}, {NodeId(4)}},
      {{NodeId(0), NodeId(1), 0.03, 0.04},
       {NodeId(1), NodeId(2), 0.3, 0.4},
       {NodeId(0), NodeId(3), 0.6, 0.8},
       {NodeId(3), NodeId(4), 0.0, 0.0}});
  // Leaf 2 sits at 0.05 + 0.5, leaf 4 at 1.0 + 0.
  EXPECT_EQ(net.nodes()[deepest_node(net)].id, NodeId(4));
}

TEST(DeepestNode, TiesGoToTheLowerPosition) {
  const FeederNetwork net = FeederNetwork::build(
      "t", 1.0, NodeId(0), 1.0, {{NodeId(1)}, {NodeId(2)}},
      {{NodeId(0), NodeId(1), 0.1, 0.1}, {NodeId(0), NodeId(2), 0.1, 0.1}});
  EXPECT_EQ(deepest_node(net), 0u);
}

struct Recorded {
  std::string text;
  std::size_t records = 0;
  std::vector<std::string> columns;
};

Recorded record(const Problem& problem, const SolverConfig& config, std::vector<DispatchEvent> events = {}) {
  std::ostringstream out;
  std::vector<ProbeNode> probes;
  for (std::size_t k = 0; k < problem.feeder_count(); ++k) {
    probes.push_back({k, deepest_node(problem.system().feeder(k).network())});
  }
  TraceWriter writer(out, problem, probes, config.zero_lambda_for_ders);
  writer.write_header();
  solve(problem, config, events, {}, [&](const IterationView& v) { writer.write(v); });
  return {out.str(), writer.records(), writer.columns()};
}

TEST(TraceWriter, ColumnOrder) {
  const Problem problem = test::toy_problem();
  std::ostringstream out;
  TraceWriter writer(out, problem, {{0, 0}}, false);
  const std::vector<std::string> expected{
      "iteration", "lambda",      "pm_1",       "pl_toy",      "vmin_toy",    "vmax_toy", "slack_residual",
      "total_cost", "alpha_toy_1", "beta_toy_1", "primal_step", "dual_step"};
  EXPECT_EQ(writer.columns(), expected);
  EXPECT_THROW(TraceWriter(out, problem, {{0, 1}}, false), ModelError);
  EXPECT_THROW(TraceWriter(out, problem, {{1, 0}}, false), ModelError);
}

TEST(TraceWriter, OneRecordPerIterationAndRoundTrip) {
  std::mt19937_64 rng(82);
  const Problem problem = test::random_problem(rng, 2, 5);
  SolverConfig config;
  config.epsilon = 0.05;
  config.max_iterations = 40;
  config.stop_at_convergence = false;
  const Recorded r = record(problem, config);
  EXPECT_EQ(r.records, 41u);
  EXPECT_EQ(r.text.rfind(kTraceVersionLine, 0), 0u);

  const TraceTable t = parse_trace(r.text);
  EXPECT_EQ(t.columns, r.columns);
  ASSERT_EQ(t.rows.size(), 41u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(t.rows[i][0], static_cast<double>(i));
  EXPECT_TRUE(std::isnan(t.rows[0][t.column("primal_step")]));
  EXPECT_TRUE(std::isnan(t.rows[0][t.column("dual_step")]));
  EXPECT_FALSE(std::isnan(t.rows[1][t.column("primal_step")]));
  EXPECT_EQ(t.rows[0][t.column("slack_residual")], 0.0);
}

TEST(ParseTrace, Errors) {
  EXPECT_THROW(parse_trace("iteration,lambda\n0,1\n"), CaseError);
  EXPECT_THROW(parse_trace(std::string(kTraceVersionLine) + "\n"), CaseError);
  try {
    parse_trace(std::string(kTraceVersionLine) + "\niteration,lambda\n0,1\n1\n");
    FAIL() << "expected CaseError";
  } catch (const CaseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_trace(std::string(kTraceVersionLine) + "\niteration,lambda\n0,x1\n"), CaseError);
  const TraceTable t = parse_trace(std::string(kTraceVersionLine) + "\niteration,lambda\n0,NA\n");
  EXPECT_TRUE(std::isnan(t.rows[0][1]));
  EXPECT_THROW(t.column("total_cost"), CaseError);
}

TraceTable table(const std::vector<std::pair<double, double>>& rows) {
  std::string text = std::string(kTraceVersionLine) + "\niteration,total_cost\n";
  for (const auto& [i, c] : rows) text += format_number(i) + "," + format_number(c) + "\n";
  return parse_trace(text);
}

TEST(Compare, IdenticalTracesHaveZeroDelta) {
  const TraceTable a = table({{0, 3.0}, {1, 2.5}, {2, 2.0}});
  const CompareReport r = compare_runs(a, a);
  EXPECT_EQ(r.final_delta, 0.0);
  EXPECT_EQ(r.max_abs_delta, 0.0);
  EXPECT_EQ(r.delta.size(), 3u);
}

TEST(Compare, DeltaIsBMinusA) {
  const CompareReport r = compare_runs(table({{0, 3.0}, {1, 2.0}}), table({{0, 3.0}, {1, 2.5}}));
  EXPECT_EQ(r.final_a, 2.0);
  EXPECT_EQ(r.final_b, 2.5);
  EXPECT_EQ(r.final_delta, 0.5);
  EXPECT_EQ(r.max_abs_delta, 0.5);
  EXPECT_NE(r.to_json().find("\"final_delta\": 0.5"), std::string::npos);
}

TEST(Compare, HorizonMismatchAndUnknownMetric) {
  const TraceTable a = table({{0, 3.0}, {1, 2.0}});
  EXPECT_THROW(compare_runs(a, table({{0, 3.0}})), ModelError);
  EXPECT_THROW(compare_runs(a, table({{0, 3.0}, {2, 2.0}})), ModelError);
  EXPECT_THROW(compare_runs(a, a, "lambda"), CaseError);
}

}  // namespace
}  // namespace tdco
