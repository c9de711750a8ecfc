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

#include "tdco/scenario.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tdco/case_io.hpp"
#include "tdco/logging.hpp"

namespace tdco {

using nlohmann::json;

std::string to_string(EngineKind engine) {
  switch (engine) {
    case EngineKind::kCore:
      return "core";
    case EngineKind::kMarketGradient:
      return "market";
    case EngineKind::kMarketBestResponse:
      return "market-br";
  }
  return "core";
}

std::string to_string(FeedbackMode mode) { return mode == FeedbackMode::kAc ? "ac" : "linear"; }

EngineKind parse_engine(const std::string& name) {
  if (name == "core") return EngineKind::kCore;
  if (name == "market" || name == "market-gradient") return EngineKind::kMarketGradient;
  if (name == "market-br" || name == "market-best-response") return EngineKind::kMarketBestResponse;
  throw CaseError("unknown engine \"" + name + "\" (core, market, market-br)");
}

FeedbackMode parse_feedback(const std::string& name) {
  if (name == "linear") return FeedbackMode::kLinear;
  if (name == "ac") return FeedbackMode::kAc;
  throw CaseError("unknown feedback \"" + name + "\" (linear, ac)");
}

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw CaseError(where + ": field \"" + key + "\" is missing or has the wrong type");
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key, where);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw CaseError(where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= item.key() == a;
    if (!ok) throw CaseError(where + ": unknown field \"" + item.key() + "\"");
  }
}

SolverConfig parse_solver(const json& j) {
  const std::string w = "solver";
  check_keys(j, {"epsilon", "eta", "max_iterations", "primal_tolerance", "dual_tolerance",
                 "balance_tolerance", "blowup_bound", "order", "sweep", "stop_at_convergence"},
             w);
  SolverConfig c;
  c.epsilon = field_or(j, "epsilon", c.epsilon, w);
  c.eta = field_or(j, "eta", c.eta, w);
  c.max_iterations = field_or(j, "max_iterations", c.max_iterations, w);
  c.primal_tolerance = field_or(j, "primal_tolerance", c.primal_tolerance, w);
  c.dual_tolerance = field_or(j, "dual_tolerance", c.dual_tolerance, w);
  c.balance_tolerance = field_or(j, "balance_tolerance", c.balance_tolerance, w);
  c.blowup_bound = field_or(j, "blowup_bound", c.blowup_bound, w);
  c.stop_at_convergence = field_or(j, "stop_at_convergence", c.stop_at_convergence, w);
  const std::string order = field_or<std::string>(j, "order", "sequential", w);
  if (order == "sequential") {
    c.order = StepOrder::kSequential;
  } else if (order == "jacobi") {
    c.order = StepOrder::kJacobi;
  } else {
    throw CaseError("solver.order must be \"sequential\" or \"jacobi\"");
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, {"tolerance", "max_iterations"}, "solver.sweep");
    c.sweep.tolerance = field_or(s, "tolerance", c.sweep.tolerance, "solver.sweep");
    c.sweep.max_iterations = field_or(s, "max_iterations", c.sweep.max_iterations, "solver.sweep");
  }
  try {
    c.validate();
  } catch (const ModelError& e) {
    throw CaseError(std::string("solver: ") + e.what());
  }
  return c;
}

ScenarioEvent parse_event(const json& j, std::size_t i) {
  const std::string w = "events[" + std::to_string(i) + "]";
  check_keys(j, {"iteration", "kind", "generator", "factor"}, w);
  ScenarioEvent e;
  e.iteration = field<int>(j, "iteration", w);
  const std::string kind = field<std::string>(j, "kind", w);
  if (kind == "generator-outage") {
    e.kind = EventKind::kGeneratorOutage;
    e.generator_id = field<int>(j, "generator", w);
  } else if (kind == "der-capacity-scale") {
    e.kind = EventKind::kDerCapacityScale;
    e.factor = field<double>(j, "factor", w);
    if (!(e.factor > 0.0)) throw CaseError(w + ": factor must be positive");
  } else {
    throw CaseError(w + ": unknown kind \"" + kind + "\"");
  }
  if (e.iteration < 0) throw CaseError(w + ": iteration must be non-negative");
  return e;
}

InitOptions parse_initial(const json& j) {
  const std::string w = "initial";
  check_keys(j, {"generators", "ders", "lambda", "mu"}, w);
  InitOptions o;
  const std::string g = field_or<std::string>(j, "generators", "mid-box", w);
  if (g == "mid-box") {
    o.generators = GeneratorStart::kMidBox;
  } else if (g == "setpoint") {
    o.generators = GeneratorStart::kSetpoint;
  } else {
    throw CaseError("initial.generators must be \"mid-box\" or \"setpoint\"");
  }
  const std::string d = field_or<std::string>(j, "ders", "zero", w);
  if (d == "zero") {
    o.ders = DerStart::kZero;
  } else if (d == "upper") {
    o.ders = DerStart::kUpper;
  } else if (d == "lower") {
    o.ders = DerStart::kLower;
  } else {
    throw CaseError("initial.ders must be \"zero\", \"upper\" or \"lower\"");
  }
  o.lambda = field_or(j, "lambda", 0.0, w);
  o.mu = field_or(j, "mu", 0.0, w);
  if (o.mu < 0.0) throw CaseError("initial.mu must be non-negative");
  return o;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CaseError("scenario: syntax error at byte " + std::to_string(e.byte));
  }
  const std::string w = "scenario";
  check_keys(j, {"name", "transmission", "feeders", "host_load", "voltage_limits", "solver", "engine",
                 "feedback", "slack_reference", "zero_lambda_for_ders", "events", "initial",
                 "probes", "seed", "perturbation"},
             w);
  Scenario s;
  s.name = field_or<std::string>(j, "name", "scenario", w);
  s.transmission = base_dir / field<std::string>(j, "transmission", w);
  if (!std::filesystem::exists(s.transmission)) {
    throw CaseError("scenario: transmission case " + s.transmission.string() + " does not exist");
  }
  if (j.contains("feeders")) {
    std::size_t i = 0;
    for (const json& f : j.at("feeders")) {
      const std::string fw = "feeders[" + std::to_string(i++) + "]";
      check_keys(f, {"case", "host_bus", "id"}, fw);
      FeederRef ref;
      ref.path = base_dir / field<std::string>(f, "case", fw);
      if (!std::filesystem::exists(ref.path)) {
        throw CaseError(fw + ": feeder case " + ref.path.string() + " does not exist");
      }
      if (f.contains("host_bus")) ref.host_bus = field<int>(f, "host_bus", fw);
      if (f.contains("id")) ref.id = field<std::string>(f, "id", fw);
      s.feeders.push_back(std::move(ref));
    }
  }
  const std::string host_load = field_or<std::string>(j, "host_load", "keep", w);
  if (host_load != "keep" && host_load != "replace") {
    throw CaseError("scenario: host_load must be \"keep\" or \"replace\"");
  }
  s.replace_host_load = host_load == "replace";
  if (j.contains("voltage_limits")) {
    const json& v = j.at("voltage_limits");
    check_keys(v, {"v_min", "v_max"}, "voltage_limits");
    s.limits.v_min = field_or(v, "v_min", s.limits.v_min, "voltage_limits");
    s.limits.v_max = field_or(v, "v_max", s.limits.v_max, "voltage_limits");
    try {
      s.limits.validate();
    } catch (const ModelError& e) {
      throw CaseError(std::string("voltage_limits: ") + e.what());
    }
  }
  if (j.contains("solver")) s.solver = parse_solver(j.at("solver"));
  s.engine = parse_engine(field_or<std::string>(j, "engine", "core", w));
  s.solver.feedback = parse_feedback(field_or<std::string>(j, "feedback", "linear", w));
  if (j.contains("slack_reference") && !j.at("slack_reference").is_null()) {
    const json& r = j.at("slack_reference");
    if (r.is_string()) {
      if (r.get<std::string>() != "initial") {
        throw CaseError("scenario: slack_reference must be a number or \"initial\"");
      }
    } else {
      s.solver.slack_reference = field<double>(j, "slack_reference", w);
    }
  }
  s.solver.zero_lambda_for_ders = field_or(j, "zero_lambda_for_ders", false, w);
  if (j.contains("events")) {
    std::size_t i = 0;
    for (const json& e : j.at("events")) {
      ScenarioEvent ev = parse_event(e, i);
      if (ev.iteration >= s.solver.max_iterations) {
        throw CaseError("events[" + std::to_string(i) + "]: iteration " + std::to_string(ev.iteration) +
                        " is not below max_iterations " + std::to_string(s.solver.max_iterations));
      }
      s.events.push_back(ev);
      ++i;
    }
  }
  if (j.contains("initial")) s.initial = parse_initial(j.at("initial"));
  if (j.contains("probes")) {
    for (const auto& item : j.at("probes").items()) {
      if (!item.value().is_string()) throw CaseError("probes." + item.key() + " must be a node id string");
      s.probes[item.key()] = item.value().get<std::string>();
    }
  }
  s.seed = field_or<std::uint64_t>(j, "seed", 0, w);
  s.perturbation = field_or(j, "perturbation", 0.0, w);
  if (s.perturbation < 0.0) throw CaseError("scenario: perturbation must be non-negative");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return parse_scenario(read_text_file(path), path.parent_path());
  } catch (const CaseError& e) {
    throw CaseError(path.string() + ": " + e.what());
  }
}

Problem build_problem(const Scenario& scenario) {
  TransmissionSystem ts = load_transmission(scenario.transmission);
  std::vector<DistributionFeeder> feeders;
  for (const FeederRef& ref : scenario.feeders) {
    DistributionFeeder f = load_feeder(ref.path);
    if (ref.host_bus) f = f.with_host(BusId(*ref.host_bus));
    if (ref.id) f = DistributionFeeder::build(*ref.id, f.host_bus(), f.network(), f.ders());
    feeders.push_back(std::move(f));
  }
  AttachOptions opts;
  opts.replace_host_load = scenario.replace_host_load;
  return Problem(attach_feeders(std::move(ts), std::move(feeders), opts), scenario.limits);
}

std::vector<DispatchEvent> resolve_events(const Scenario& scenario, const Problem& problem) {
  std::vector<DispatchEvent> out;
  for (const ScenarioEvent& e : scenario.events) {
    DispatchEvent d;
    d.iteration = e.iteration;
    d.kind = e.kind;
    d.factor = e.factor;
    if (e.generator_id) d.generator = problem.transmission().generator_index(GeneratorId(*e.generator_id));
    out.push_back(d);
  }
  return out;
}

std::vector<ProbeNode> resolve_probes(const Scenario& scenario, const Problem& problem) {
  std::vector<ProbeNode> out;
  const CoupledSystem& system = problem.system();
  for (const auto& [fid, node] : scenario.probes) {
    system.feeder_index(fid);  // throws for unknown feeders
    (void)node;
  }
  for (std::size_t k = 0; k < system.feeder_count(); ++k) {
    const DistributionFeeder& f = system.feeder(k);
    const auto it = scenario.probes.find(f.id());
    std::size_t node = 0;
    if (it == scenario.probes.end()) {
      node = deepest_node(f.network());
    } else {
      const int id = std::stoi(it->second);
      if (!f.network().has_node(NodeId(id))) {
        throw CaseError("probe node " + it->second + " is not on feeder " + f.id());
      }
      node = f.network().node_index(NodeId(id));
    }
    out.push_back({k, node});
  }
  return out;
}

PrimalState initial_primal(const Scenario& scenario, const Problem& problem) {
  const DeviceStatus status = DeviceStatus::from_system(problem.system());
  PrimalState x = make_initial_primal(problem, status, scenario.initial);
  if (scenario.perturbation > 0.0) {
    std::mt19937_64 rng(scenario.seed);
    std::uniform_real_distribution<double> u(-scenario.perturbation, scenario.perturbation);
    for (Eigen::Index i = 0; i < x.p.size(); ++i) x.p(i) += u(rng);
    for (Eigen::Index i = 0; i < x.q.size(); ++i) x.q(i) += u(rng);
    for (Eigen::Index i = 0; i < x.p_m.size(); ++i) x.p_m(i) += u(rng);
    x = problem.project(x, status);
  }
  return x;
}

namespace {

SolveResult run_engine(const Scenario& scenario, const Problem& problem,
                       const IterationObserver& observer) {
  warn_on_stepsize(problem, scenario.solver);
  const PrimalState x0 = initial_primal(scenario, problem);
  const DualState y0 = make_initial_dual(problem, scenario.initial);
  const auto events = resolve_events(scenario, problem);
  if (scenario.engine == EngineKind::kCore) {
    CoreEngine engine(problem, scenario.solver, x0, y0);
    return drive(engine, scenario.solver, events, observer);
  }
  MarketOptions opts;
  opts.mode = scenario.engine == EngineKind::kMarketGradient ? UserMode::kGradient
                                                             : UserMode::kBestResponse;
  MarketEngine engine(problem, scenario.solver, x0, y0, opts);
  return drive(engine, scenario.solver, events, observer);
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

ScenarioRun run_scenario(const Scenario& scenario, const Problem& problem, std::ostream& trace) {
  TraceWriter writer(trace, problem, resolve_probes(scenario, problem),
                     scenario.solver.zero_lambda_for_ders);
  writer.write_header();
  ScenarioRun run;
  try {
    run.result = run_engine(scenario, problem, [&](const IterationView& v) { writer.write(v); });
  } catch (const PowerFlowError& e) {
    throw PowerFlowError(scenario.name + ": " + e.what());
  } catch (const DivergenceError& e) {
    throw DivergenceError(scenario.name + ": " + e.what());
  } catch (const SolverError& e) {
    throw SolverError(scenario.name + ": " + e.what());
  }
  run.records = writer.records();
  run.summary_json = summarize(scenario, problem, run.result);
  return run;
}

ScenarioRun run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
  const Problem problem = build_problem(scenario);
  std::filesystem::create_directories(out_dir);
  std::ofstream trace(out_dir / "trace.csv", std::ios::binary);
  if (!trace) throw CaseError("cannot write " + (out_dir / "trace.csv").string());
  ScenarioRun run = run_scenario(scenario, problem, trace);
  std::ofstream summary(out_dir / "summary.json", std::ios::binary);
  if (!summary) throw CaseError("cannot write " + (out_dir / "summary.json").string());
  summary << run.summary_json << '\n';
  return run;
}

std::string summarize(const Scenario& scenario, const Problem& problem, const SolveResult& result) {
  const CoupledSystem& system = problem.system();
  const auto& gens = problem.transmission().generators();
  json gen_list = json::array();
  for (std::size_t j = 0; j < gens.size(); ++j) {
    gen_list.push_back({{"id", gens[j].id.value},
                        {"bus", gens[j].bus.value},
                        {"p_m", result.x.p_m(static_cast<Eigen::Index>(j))},
                        {"online", static_cast<bool>(result.device_status.generator_online[j])}});
  }
  json der_list = json::array();
  json voltages = json::object();
  json active = json::object();
  const VoltageLimits& lim = problem.limits();
  for (std::size_t k = 0; k < system.feeder_count(); ++k) {
    const DistributionFeeder& f = system.feeder(k);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!f.der_at(i)) continue;
      const auto g = static_cast<Eigen::Index>(system.global_index(k, i));
      der_list.push_back({{"feeder", f.id()},
                          {"node", f.network().nodes()[i].id.value},
                          {"p", result.x.p(g)},
                          {"q", result.x.q(g)}});
    }
    const Eigen::VectorXd& v = result.flows.v[k];
    const Eigen::VectorXd& mu = result.y.mu[k];
    const auto nk = v.size();
    json upper = json::array();
    json lower = json::array();
    for (Eigen::Index i = 0; i < nk; ++i) {
      const int node = f.network().nodes()[static_cast<std::size_t>(i)].id.value;
      if (mu(i) > 0.0) upper.push_back({{"node", node}, {"v", v(i)}, {"mu", mu(i)}});
      if (mu(nk + i) > 0.0) lower.push_back({{"node", node}, {"v", v(i)}, {"mu", mu(nk + i)}});
    }
    voltages[f.id()] = {{"min", nk ? v.minCoeff() : lim.v_min},
                        {"max", nk ? v.maxCoeff() : lim.v_max},
                        {"values", to_std(v)}};
    active[f.id()] = {{"upper", upper}, {"lower", lower}};
  }
  json phases = json::array();
  for (const PhaseSummary& p : result.phases) {
    phases.push_back({{"end_iteration", p.end_iteration},
                      {"converged", p.converged},
                      {"lambda", p.lambda},
                      {"p_m", to_std(p.x.p_m)}});
  }
  json j{{"format", "tdco-summary v1"},
         {"scenario", scenario.name},
         {"engine", to_string(scenario.engine)},
         {"feedback", to_string(scenario.solver.feedback)},
         {"status", result.status == SolveStatus::kConverged ? "converged" : "not-converged"},
         {"iterations", result.iterations},
         {"lambda", result.y.lambda},
         {"slack_reference", result.slack_reference},
         {"slack_residual", result.residual},
         {"total_cost", problem.total_cost(result.x)},
         {"dispatch", {{"generators", gen_list}, {"ders", der_list}}},
         {"voltages", voltages},
         {"active_constraints", active},
         {"phases", phases}};
  return j.dump(2);
}

OracleReport probe_oracle(const Scenario& scenario, const OracleOptions& options) {
  const Problem problem = build_problem(scenario);
  const SolveResult result = run_engine(scenario, problem, {});
  return compare_with_oracle(problem, result.device_status, result.slack_reference, result.x, options);
}

}  // namespace tdco
