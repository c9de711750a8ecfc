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

// Command-line front end: run scenarios, compare traces, check against the
// grid-search oracle and dump linear feeder models.
//
// Exit codes: 0 converged (or command succeeded), 2 iteration limit, 1 error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "tdco/case_io.hpp"
#include "tdco/compare.hpp"
#include "tdco/lin_model.hpp"
#include "tdco/scenario.hpp"

namespace {

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw tdco::CaseError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << tdco::format_number(m(i, j));
    out << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission and distribution co-optimization"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  std::optional<std::string> engine;
  std::optional<std::string> feedback;
  std::optional<int> max_iter;
  std::optional<double> eps;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run a scenario and write trace.csv and summary.json");
  run->add_option("scenario", scenario_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--engine", engine, "core | market | market-br");
  run->add_option("--feedback", feedback, "linear | ac");
  run->add_option("--max-iter", max_iter, "iteration limit")->check(CLI::NonNegativeNumber);
  run->add_option("--eps", eps, "stepsize")->check(CLI::PositiveNumber);
  run->add_option("--eta", eta, "regularization weight")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "seed for the initial-point perturbation");

  std::string trace_a;
  std::string trace_b;
  std::string metric = "total_cost";
  auto* compare = app.add_subcommand("compare", "compare two traces of the same horizon");
  compare->add_option("a", trace_a, "first trace")->required()->check(CLI::ExistingFile);
  compare->add_option("b", trace_b, "second trace")->required()->check(CLI::ExistingFile);
  compare->add_option("--metric", metric, "trace column to compare");

  std::string oracle_path;
  auto* oracle = app.add_subcommand("oracle", "check a small scenario against a grid-search oracle");
  oracle->add_option("scenario", oracle_path, "scenario JSON file")->required()->check(CLI::ExistingFile);

  std::string feeder_path;
  std::string dump_dir = "model";
  auto* dump = app.add_subcommand("dump-model", "write the linear model of a feeder as CSV matrices");
  dump->add_option("feeder", feeder_path, "feeder case file")->required()->check(CLI::ExistingFile);
  dump->add_option("--out", dump_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      tdco::Scenario s = tdco::load_scenario(scenario_path);
      if (engine) s.engine = tdco::parse_engine(*engine);
      if (feedback) s.solver.feedback = tdco::parse_feedback(*feedback);
      if (max_iter) s.solver.max_iterations = *max_iter;
      if (eps) s.solver.epsilon = *eps;
      if (eta) s.solver.eta = *eta;
      if (seed) s.seed = *seed;
      const tdco::ScenarioRun r = tdco::run_scenario(s, out_dir);
      const bool converged = r.result.status == tdco::SolveStatus::kConverged;
      std::cout << s.name << ": " << (converged ? "converged" : "iteration limit") << " after "
                << r.result.iterations << " iterations, lambda " << tdco::format_number(r.result.y.lambda)
                << ", slack residual " << tdco::format_number(r.result.residual) << '\n'
                << "wrote " << (std::filesystem::path(out_dir) / "trace.csv").string() << " ("
                << r.records << " records) and "
                << (std::filesystem::path(out_dir) / "summary.json").string() << '\n';
      return converged ? 0 : 2;
    }
    if (*compare) {
      const auto report = tdco::compare_runs(tdco::load_trace(trace_a), tdco::load_trace(trace_b), metric);
      std::cout << report.to_json() << '\n';
      return 0;
    }
    if (*oracle) {
      std::cout << tdco::probe_oracle(tdco::load_scenario(oracle_path)).to_json() << '\n';
      return 0;
    }
    if (*dump) {
      const tdco::DistributionFeeder f = tdco::load_feeder(feeder_path);
      const tdco::LinearFeederModel m = tdco::build_lindistflow(f.network());
      const std::filesystem::path dir(dump_dir);
      std::filesystem::create_directories(dir);
      write_matrix(dir / "A.csv", m.a);
      write_matrix(dir / "B.csv", m.b);
      write_matrix(dir / "c.csv", m.c);
      write_matrix(dir / "M.csv", m.m);
      write_matrix(dir / "N.csv", m.n);
      write_matrix(dir / "d.csv", Eigen::MatrixXd::Constant(1, 1, m.d));
      std::cout << "wrote the " << m.size() << "-node model of " << f.id() << " to " << dir.string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
