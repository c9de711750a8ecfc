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

#pragma once

// Scenario files: which cases to couple, solver settings, engine, feedback,
// timed events and initial point. Paths inside a scenario are relative to
// the scenario file. The schema is documented in docs/scenario_schema.md.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdco/market.hpp"
#include "tdco/oracle.hpp"
#include "tdco/trace.hpp"

namespace tdco {

enum class EngineKind { kCore, kMarketGradient, kMarketBestResponse };

std::string to_string(EngineKind engine);
std::string to_string(FeedbackMode mode);
EngineKind parse_engine(const std::string& name);    ///< core | market | market-br
FeedbackMode parse_feedback(const std::string& name);  ///< linear | ac

struct FeederRef {
  std::filesystem::path path;
  std::optional<int> host_bus;  ///< overrides the case file
  std::optional<std::string> id;
};

/// Event as written in a scenario: generators are named by id.
struct ScenarioEvent {
  int iteration = 0;
  EventKind kind = EventKind::kGeneratorOutage;
  std::optional<int> generator_id;
  double factor = 1.0;
};

struct Scenario {
  std::string name;
  std::filesystem::path transmission;
  std::vector<FeederRef> feeders;
  bool replace_host_load = false;
  VoltageLimits limits;
  SolverConfig solver;
  EngineKind engine = EngineKind::kCore;
  std::vector<ScenarioEvent> events;
  InitOptions initial;
  /// Feeder id -> probe node id; feeders not listed use their deepest leaf.
  std::map<std::string, std::string> probes;
  std::uint64_t seed = 0;
  /// Half-width of a uniform perturbation of the initial primal point,
  /// drawn from `seed` and projected back onto the boxes. 0 disables it.
  double perturbation = 0.0;
};

/// Throws CaseError on syntax or schema errors (naming the field), on
/// missing case files and on events at or past max_iterations.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

/// Loads and couples the cases and builds the linear models.
Problem build_problem(const Scenario& scenario);

/// Maps generator ids to positions; throws CaseError for unknown ids.
std::vector<DispatchEvent> resolve_events(const Scenario& scenario, const Problem& problem);

std::vector<ProbeNode> resolve_probes(const Scenario& scenario, const Problem& problem);

/// Initial primal point including the seeded perturbation.
PrimalState initial_primal(const Scenario& scenario, const Problem& problem);

struct ScenarioRun {
  SolveResult result;
  std::size_t records = 0;
  std::string summary_json;
};

/// Runs the configured engine, streaming the trace CSV to `trace`. Engine
/// errors are rethrown with the scenario name prefixed.
ScenarioRun run_scenario(const Scenario& scenario, const Problem& problem, std::ostream& trace);

/// Same, writing <out_dir>/trace.csv and <out_dir>/summary.json.
ScenarioRun run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Summary JSON: status, final dispatch and voltages, active voltage
/// constraints, and lambda before every event and at the end.
std::string summarize(const Scenario& scenario, const Problem& problem, const SolveResult& result);

/// Runs the scenario with its engine and checks the end point against the
/// grid-search oracle.
OracleReport probe_oracle(const Scenario& scenario, const OracleOptions& options = {});

}  // namespace tdco
