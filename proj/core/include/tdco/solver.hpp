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

// Iteration driver shared by the centralized engine and the market: timed
// events, convergence test, divergence detector and per-iteration callbacks.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tdco/codispatch.hpp"

namespace tdco {

enum class EventKind { kGeneratorOutage, kDerCapacityScale };

struct DispatchEvent {
  int iteration = 0;
  EventKind kind = EventKind::kGeneratorOutage;
  std::optional<std::size_t> generator;  ///< position in the generator list, outages only
  double factor = 1.0;                   ///< capacity scaling; applies to every DER

  /// Throws ModelError on a negative iteration, a missing or unknown
  /// generator, or a non-positive factor.
  void validate(const Problem& problem) const;
};

/// Changes device availability and projects x onto the new boxes.
void apply_event(const Problem& problem, const DispatchEvent& event, DeviceStatus& status,
                 PrimalState& x);

enum class GeneratorStart { kMidBox, kSetpoint };
enum class DerStart { kZero, kUpper, kLower };

struct InitOptions {
  GeneratorStart generators = GeneratorStart::kMidBox;
  DerStart ders = DerStart::kZero;
  double lambda = 0.0;
  double mu = 0.0;  ///< every mu entry; must be >= 0
};

PrimalState make_initial_primal(const Problem& problem, const DeviceStatus& status,
                                const InitOptions& init);
DualState make_initial_dual(const Problem& problem, const InitOptions& init);

/// What an observer sees after events at `iteration` were applied. Step
/// sizes describe the step that produced this state and are empty at 0.
struct IterationView {
  std::size_t iteration = 0;
  const PrimalState& x;
  const DualState& y;
  const FlowSnapshot& flows;
  const DeviceStatus& status;
  double residual = 0.0;
  std::optional<double> primal_step;
  std::optional<double> dual_step;
};

using IterationObserver = std::function<void(const IterationView&)>;

enum class SolveStatus { kConverged, kIterationLimit };

/// State just before an event fired, or at the end of the run.
struct PhaseSummary {
  std::size_t end_iteration = 0;
  bool converged = false;  ///< convergence test held on the last step of the phase
  double lambda = 0.0;
  PrimalState x;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kIterationLimit;
  std::size_t iterations = 0;  ///< executed steps
  PrimalState x;
  DualState y;
  FlowSnapshot flows;
  DeviceStatus device_status;
  double slack_reference = 0.0;
  double residual = 0.0;
  std::vector<PhaseSummary> phases;  ///< state before each event iteration, then the final state
};

/// One engine that the driver can advance. Implementations own the state.
class IterativeEngine {
 public:
  virtual ~IterativeEngine() = default;

  virtual const PrimalState& primal() const = 0;
  virtual const DualState& dual() const = 0;
  virtual const FlowSnapshot& flows() const = 0;
  virtual const DeviceStatus& status() const = 0;
  /// Slack residual of the current state.
  virtual double residual() const = 0;
  virtual double slack_reference() const = 0;

  /// Applies `event`, then refreshes the flows for the current tag.
  virtual void apply(const DispatchEvent& event) = 0;
  /// Advances from `tag` to `tag + 1`.
  virtual void step(std::size_t tag) = 0;
};

/// Runs `engine` until convergence with no pending event or until
/// config.max_iterations steps. Throws DivergenceError when |x|_inf or
/// |lambda| exceeds config.blowup_bound or a value is not finite, and
/// rethrows engine errors with the iteration prefixed.
SolveResult drive(IterativeEngine& engine, const SolverConfig& config,
                  std::vector<DispatchEvent> events, const IterationObserver& observer = {});

/// The centralized projected primal-dual engine.
class CoreEngine : public IterativeEngine {
 public:
  CoreEngine(const Problem& problem, const SolverConfig& config, PrimalState x0, DualState y0);

  const PrimalState& primal() const override { return x_; }
  const DualState& dual() const override { return y_; }
  const FlowSnapshot& flows() const override { return flows_; }
  const DeviceStatus& status() const override { return status_; }
  double residual() const override;
  double slack_reference() const override { return slack_.reference(); }

  void apply(const DispatchEvent& event) override;
  void step(std::size_t tag) override;

 private:
  const Problem& problem_;
  SolverConfig config_;
  DeviceStatus status_;
  PrimalState x_;
  DualState y_;
  FlowSnapshot flows_;
  SlackAccount slack_;
};

/// Logs a warning when config.epsilon exceeds the stepsize bound; silent
/// when a cost carries no modulus.
void warn_on_stepsize(const Problem& problem, const SolverConfig& config);

/// Centralized solve from the configured initial point. Logs a warning when
/// epsilon exceeds the stepsize bound.
SolveResult solve(const Problem& problem, const SolverConfig& config,
                  const std::vector<DispatchEvent>& events = {}, const InitOptions& init = {},
                  const IterationObserver& observer = {});

}  // namespace tdco
