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

#include "tdco/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdco/logging.hpp"
#include "tdco/stepsize.hpp"

namespace tdco {

void DispatchEvent::validate(const Problem& problem) const {
  if (iteration < 0) throw ModelError("event iteration must be non-negative");
  if (kind == EventKind::kGeneratorOutage) {
    if (!generator) throw ModelError("generator outage needs a target generator");
    if (*generator >= problem.generator_count()) {
      throw ModelError("outage targets unknown generator position " + std::to_string(*generator));
    }
  } else if (!(factor > 0.0)) {
    throw ModelError("capacity scaling factor must be positive");
  }
}

void apply_event(const Problem& problem, const DispatchEvent& event, DeviceStatus& status,
                 PrimalState& x) {
  event.validate(problem);
  if (event.kind == EventKind::kGeneratorOutage) {
    status.generator_online[*event.generator] = false;
  } else {
    for (double& s : status.der_scale) s *= event.factor;
  }
  x = problem.project(x, status);
}

PrimalState make_initial_primal(const Problem& problem, const DeviceStatus& status,
                                const InitOptions& init) {
  const auto n = static_cast<Eigen::Index>(problem.node_count());
  const auto kg = static_cast<Eigen::Index>(problem.generator_count());
  PrimalState x{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(kg)};
  for (Eigen::Index j = 0; j < kg; ++j) {
    const auto g = static_cast<std::size_t>(j);
    const Box b = problem.generator_box(g, status);
    x.p_m(j) = init.generators == GeneratorStart::kMidBox
                   ? b.mid()
                   : problem.transmission().generators()[g].setpoint_initial;
  }
  if (init.ders != DerStart::kZero) {
    const bool upper = init.ders == DerStart::kUpper;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto g = static_cast<std::size_t>(i);
      const Box pb = problem.p_box(g, status);
      const Box qb = problem.q_box(g, status);
      x.p(i) = upper ? pb.hi : pb.lo;
      x.q(i) = upper ? qb.hi : qb.lo;
    }
  }
  return problem.project(x, status);
}

DualState make_initial_dual(const Problem& problem, const InitOptions& init) {
  if (init.mu < 0.0) throw ModelError("initial mu must be non-negative");
  DualState y = DualState::zeros(problem.system());
  y.lambda = init.lambda;
  for (auto& m : y.mu) m.setConstant(init.mu);
  return y;
}

namespace {

bool all_finite(const PrimalState& x, const DualState& y) {
  if (!x.p.allFinite() || !x.q.allFinite() || !x.p_m.allFinite()) return false;
  if (!std::isfinite(y.lambda)) return false;
  return std::all_of(y.mu.begin(), y.mu.end(), [](const auto& m) { return m.allFinite(); });
}

double inf_norm(const PrimalState& x) {
  double out = 0.0;
  if (x.p.size() > 0) out = std::max({out, x.p.cwiseAbs().maxCoeff(), x.q.cwiseAbs().maxCoeff()});
  if (x.p_m.size() > 0) out = std::max(out, x.p_m.cwiseAbs().maxCoeff());
  return out;
}

void check_divergence(const IterativeEngine& engine, const SolverConfig& config, std::size_t t) {
  const PrimalState& x = engine.primal();
  const DualState& y = engine.dual();
  std::ostringstream os;
  if (!all_finite(x, y)) {
    os << "iteration " << t << ": non-finite state";
  } else if (inf_norm(x) > config.blowup_bound || std::abs(y.lambda) > config.blowup_bound) {
    os << "iteration " << t << ": state left the blow-up bound " << config.blowup_bound
       << " (|x|_inf = " << inf_norm(x) << ", lambda = " << y.lambda << ")";
  } else {
    return;
  }
  throw DivergenceError(os.str());
}

}  // namespace

SolveResult drive(IterativeEngine& engine, const SolverConfig& config,
                  std::vector<DispatchEvent> events, const IterationObserver& observer) {
  config.validate();
  const auto max_iter = static_cast<std::size_t>(config.max_iterations);
  std::stable_sort(events.begin(), events.end(),
                   [](const DispatchEvent& a, const DispatchEvent& b) { return a.iteration < b.iteration; });
  auto dropped = std::find_if(events.begin(), events.end(), [&](const DispatchEvent& e) {
    return static_cast<std::size_t>(e.iteration) > max_iter;
  });
  if (dropped != events.end()) {
    log::warn(std::to_string(std::distance(dropped, events.end())) +
              " event(s) scheduled after the last iteration are ignored");
    events.erase(dropped, events.end());
  }

  SolveResult result;
  std::size_t next_event = 0;
  bool converged = false;
  std::optional<double> primal_step;
  std::optional<double> dual_step;
  std::size_t t = 0;
  for (;; ++t) {
    if (next_event < events.size() && static_cast<std::size_t>(events[next_event].iteration) == t) {
      result.phases.push_back({t, converged, engine.dual().lambda, engine.primal()});
    }
    while (next_event < events.size() && static_cast<std::size_t>(events[next_event].iteration) == t) {
      engine.apply(events[next_event]);
      ++next_event;
      converged = false;
    }
    check_divergence(engine, config, t);
    if (observer) {
      observer(IterationView{t, engine.primal(), engine.dual(), engine.flows(), engine.status(),
                             engine.residual(), primal_step, dual_step});
    }
    const bool pending = next_event < events.size();
    if ((converged && !pending && config.stop_at_convergence) || t == max_iter) break;

    const PrimalState x_prev = engine.primal();
    const DualState y_prev = engine.dual();
    try {
      engine.step(t);
    } catch (const DivergenceError&) {
      throw;
    } catch (const PowerFlowError& e) {
      throw PowerFlowError("iteration " + std::to_string(t) + ": " + e.what());
    } catch (const SolverError& e) {
      throw SolverError("iteration " + std::to_string(t) + ": " + e.what());
    }
    primal_step = max_abs_diff(engine.primal(), x_prev) / config.epsilon;
    dual_step = max_abs_diff(engine.dual(), y_prev) / config.epsilon;
    converged = *primal_step < config.primal_tolerance && *dual_step < config.dual_tolerance &&
                std::abs(engine.residual()) < config.balance_tolerance;
  }

  result.status = converged && next_event == events.size() ? SolveStatus::kConverged
                                                            : SolveStatus::kIterationLimit;
  result.iterations = t;
  result.x = engine.primal();
  result.y = engine.dual();
  result.flows = engine.flows();
  result.device_status = engine.status();
  result.slack_reference = engine.slack_reference();
  result.residual = engine.residual();
  result.phases.push_back({t, converged, result.y.lambda, result.x});
  return result;
}

CoreEngine::CoreEngine(const Problem& problem, const SolverConfig& config, PrimalState x0,
                       DualState y0)
    : problem_(problem),
      config_(config),
      status_(DeviceStatus::from_system(problem.system())),
      x_(std::move(x0)),
      y_(std::move(y0)) {
  config_.validate();
  problem_.check_layout(x_);
  problem_.check_layout(y_);
  flows_ = evaluate_flows(problem_, x_, config_.feedback, config_.sweep, 0);
  if (config_.slack_reference) {
    slack_ = SlackAccount(*config_.slack_reference);
  } else {
    slack_.record(slack_output(problem_.transmission(), x_.p_m, flows_.p_substation));
  }
}

double CoreEngine::residual() const {
  return slack_residual(slack_, problem_.transmission(), x_.p_m, flows_.p_substation);
}

void CoreEngine::apply(const DispatchEvent& event) {
  apply_event(problem_, event, status_, x_);
  flows_ = evaluate_flows(problem_, x_, config_.feedback, config_.sweep, flows_.iteration_tag);
}

void CoreEngine::step(std::size_t tag) {
  StepResult r = primal_dual_step(problem_, status_, x_, y_, flows_, slack_, config_, tag);
  x_ = std::move(r.x);
  y_ = std::move(r.y);
  flows_ = std::move(r.flows);
}

void warn_on_stepsize(const Problem& problem, const SolverConfig& config) {
  const DeviceStatus status = DeviceStatus::from_system(problem.system());
  try {
    const StepsizeReport report = check_stepsize(problem, status, config.eta);
    if (!report.admits(config.epsilon)) {
      std::ostringstream os;
      os << "epsilon " << config.epsilon << " exceeds the stepsize bound " << report.bound
         << (report.advisory ? " (advisory, eta = 0)" : "");
      if (report.advisory) {
        log::info(os.str());
      } else {
        log::warn(os.str());
      }
    }
  } catch (const ModelError& e) {
    log::debug(std::string("stepsize check skipped: ") + e.what());
  }
}

SolveResult solve(const Problem& problem, const SolverConfig& config,
                  const std::vector<DispatchEvent>& events, const InitOptions& init,
                  const IterationObserver& observer) {
  config.validate();
  const DeviceStatus status = DeviceStatus::from_system(problem.system());
  warn_on_stepsize(problem, config);
  CoreEngine engine(problem, config, make_initial_primal(problem, status, init),
                    make_initial_dual(problem, init));
  return drive(engine, config, events, observer);
}

}  // namespace tdco
