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

#include <benchmark/benchmark.h>

#include <string>

#include "tdco/market.hpp"
#include "tdco/scenario.hpp"

namespace {

// One iteration of the default two-feeder scenario per benchmark step.
template <typename Engine>
void run_steps(benchmark::State& state, tdco::FeedbackMode feedback) {
  tdco::Scenario scenario =
      tdco::load_scenario(std::string(TDCO_BENCH_DATA_DIR) + "/scenarios/default.json");
  scenario.solver.feedback = feedback;
  const tdco::Problem problem = tdco::build_problem(scenario);
  Engine engine(problem, scenario.solver, tdco::initial_primal(scenario, problem),
                tdco::make_initial_dual(problem, scenario.initial));
  std::size_t tag = 0;
  for (auto _ : state) engine.step(tag++);
  state.counters["nodes"] = static_cast<double>(problem.node_count());
}

void BM_CoreStepLinear(benchmark::State& s) { run_steps<tdco::CoreEngine>(s, tdco::FeedbackMode::kLinear); }
void BM_CoreStepAc(benchmark::State& s) { run_steps<tdco::CoreEngine>(s, tdco::FeedbackMode::kAc); }
void BM_MarketStepAc(benchmark::State& s) { run_steps<tdco::MarketEngine>(s, tdco::FeedbackMode::kAc); }

BENCHMARK(BM_CoreStepLinear);
BENCHMARK(BM_CoreStepAc);
BENCHMARK(BM_MarketStepAc);

}  // namespace
