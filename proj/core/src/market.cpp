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

#include "tdco/market.hpp"

#include <algorithm>

#include <json.hpp>

namespace tdco {

IncentiveSignals compute_signals(const std::vector<LinearFeederModel>& models, double lambda,
                                 double der_lambda, const std::vector<Eigen::VectorXd>& mu,
                                 std::size_t tag) {
  if (mu.size() != models.size()) throw ModelError("one mu block per feeder model is required");
  IncentiveSignals s;
  s.lambda = lambda;
  s.iteration_tag = tag;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const LinearFeederModel& model = models[k];
    const Eigen::VectorXd w = constraint_weight(mu[k]);
    // Same expression, same grouping as grad_primal, so both engines agree bit for bit.
    s.alpha.push_back(-der_lambda * model.m + model.a.transpose() * w);
    s.beta.push_back(-der_lambda * model.n + model.b.transpose() * w);
  }
  return s;
}

std::string to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kSignalBroadcast:
      return "signal-broadcast";
    case MessageKind::kSetpointReport:
      return "setpoint-report";
    case MessageKind::kPfResult:
      return "pf-result";
    case MessageKind::kDualUpdate:
      return "dual-update";
  }
  return "unknown";
}

namespace {

nlohmann::json to_json_vec(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

nlohmann::json to_json_vecs(const std::vector<Eigen::VectorXd>& vs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : vs) out.push_back(to_json_vec(v));
  return out;
}

struct PayloadJson {
  nlohmann::json operator()(const IncentiveSignals& s) const {
    return {{"lambda", s.lambda}, {"alpha", to_json_vecs(s.alpha)}, {"beta", to_json_vecs(s.beta)}};
  }
  nlohmann::json operator()(const DerReport& r) const {
    return {{"position", r.global}, {"p", r.p}, {"q", r.q}};
  }
  nlohmann::json operator()(const GeneratorReport& r) const {
    return {{"generator", r.generator}, {"p_m", r.p_m}};
  }
  nlohmann::json operator()(const PfResult& r) const {
    return {{"feeder", r.feeder}, {"v", to_json_vec(r.v)}, {"p_substation", r.p_substation},
            {"losses", r.losses}};
  }
  nlohmann::json operator()(const DualUpdate& d) const {
    return {{"lambda", d.lambda}, {"mu", to_json_vecs(d.mu)}};
  }
};

}  // namespace

std::string AgentMessage::to_json() const {
  nlohmann::json j{{"kind", to_string(kind)},
                   {"sender", sender},
                   {"iteration_tag", iteration_tag},
                   {"payload", std::visit(PayloadJson{}, payload)}};
  return j.dump();
}

void MessageBus::post(AgentMessage message) {
  const FaultAction action = injector_ ? injector_(message) : FaultAction::kDeliver;
  switch (action) {
    case FaultAction::kDeliver:
      if (keep_log_) log_.push_back(message);
      queue_.push_back(std::move(message));
      return;
    case FaultAction::kDrop:
      faulted_ = true;
      fault_ = "dropped " + to_string(message.kind) + " from " + message.sender;
      return;
    case FaultAction::kDelay:
      faulted_ = true;
      fault_ = "delayed " + to_string(message.kind) + " from " + message.sender;
      delayed_.push_back(std::move(message));
      return;
  }
}

std::vector<AgentMessage> MessageBus::collect(MessageKind kind, std::size_t tag) {
  if (faulted_) {
    faulted_ = false;
    throw SolverError("round aborted: " + fault_);
  }
  std::vector<AgentMessage> out;
  std::vector<AgentMessage> rest;
  for (auto& m : queue_) {
    if (m.kind != kind) {
      rest.push_back(std::move(m));
      continue;
    }
    if (m.iteration_tag != tag) {
      throw SolverError("round aborted: " + to_string(kind) + " from " + m.sender + " carries tag " +
                        std::to_string(m.iteration_tag) + ", expected " + std::to_string(tag));
    }
    out.push_back(std::move(m));
  }
  queue_ = std::move(rest);
  delivered_ += out.size();
  return out;
}

void MessageBus::flush() {
  for (auto& m : delayed_) queue_.push_back(std::move(m));
  delayed_.clear();
}

DerAgent::DerAgent(std::string name, std::size_t global, std::size_t feeder, std::size_t node,
                   Der der, ScalarCost cost_p, ScalarCost cost_q, double p0, double q0)
    : name_(std::move(name)),
      global_(global),
      feeder_(feeder),
      node_(node),
      der_(std::move(der)),
      cost_p_(std::move(cost_p)),
      cost_q_(std::move(cost_q)),
      p_(p0),
      q_(q0) {}

Box DerAgent::p_box() const {
  const Box b = der_.p_box();
  return {scale_ * b.lo, scale_ * b.hi};
}

Box DerAgent::q_box() const {
  const Box b = der_.q_box();
  return {scale_ * b.lo, scale_ * b.hi};
}

void DerAgent::gradient_step(double alpha, double beta, double epsilon) {
  const Box pb = p_box();
  const Box qb = q_box();
  const double gp = cost_p_.gradient(p_) + alpha;
  const double gq = cost_q_.gradient(q_) + beta;
  p_ = project_box(p_ - epsilon * gp, pb.lo, pb.hi);
  q_ = project_box(q_ - epsilon * gq, qb.lo, qb.hi);
}

void DerAgent::best_response(double alpha, double beta) {
  if (!cost_p_.is_quadratic() || !cost_q_.is_quadratic()) {
    throw ModelError("best response needs quadratic costs (DER " + name_ + ")");
  }
  const Box pb = p_box();
  const Box qb = q_box();
  p_ = project_box(-alpha / (2.0 * cost_p_.quadratic_coefficient()), pb.lo, pb.hi);
  q_ = project_box(-beta / (2.0 * cost_q_.quadratic_coefficient()), qb.lo, qb.hi);
}

void DerAgent::scale_capacity(double factor) {
  if (!(factor > 0.0)) throw ModelError("capacity scaling factor must be positive");
  scale_ *= factor;
  const Box pb = p_box();
  const Box qb = q_box();
  p_ = std::clamp(p_, pb.lo, pb.hi);
  q_ = std::clamp(q_, qb.lo, qb.hi);
}

GeneratorAgent::GeneratorAgent(std::string name, std::size_t index, Generator gen, ScalarCost cost,
                               double p0)
    : name_(std::move(name)),
      index_(index),
      gen_(std::move(gen)),
      cost_(std::move(cost)),
      online_(gen_.online),
      p_m_(p0) {}

void GeneratorAgent::step(double lambda, double epsilon) {
  const Box b = online_ ? Box{gen_.p_min, gen_.p_max} : Box{};
  const double grad = cost_.gradient(p_m_) + lambda;
  p_m_ = project_box(p_m_ - epsilon * grad, b.lo, b.hi);
}

void GeneratorAgent::go_offline() {
  online_ = false;
  p_m_ = 0.0;
}

OperatorView OperatorView::from_problem(const Problem& problem) {
  OperatorView view;
  const CoupledSystem& system = problem.system();
  for (std::size_t k = 0; k < system.feeder_count(); ++k) {
    view.networks.push_back(system.feeder(k).network());
    view.offsets.push_back(system.offset(k));
  }
  view.models = problem.models();
  view.node_count = system.node_count();
  view.generator_count = system.generator_count();
  view.total_p0 = problem.transmission().total_p0();
  view.limits = problem.limits();
  return view;
}

OperatorAgent::OperatorAgent(OperatorView view, const SolverConfig& config, DualState y0)
    : view_(std::move(view)), config_(config), y_(std::move(y0)) {
  if (config_.slack_reference) slack_ = SlackAccount(*config_.slack_reference);
}

FlowSnapshot OperatorAgent::power_flow(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                       std::size_t tag) const {
  if (config_.feedback == FeedbackMode::kAc) {
    return solve_ac(view_.networks, view_.offsets, p, q, config_.sweep, tag);
  }
  FlowSnapshot snap;
  snap.source = FeedbackMode::kLinear;
  snap.iteration_tag = tag;
  for (std::size_t k = 0; k < view_.models.size(); ++k) {
    const auto off = static_cast<Eigen::Index>(view_.offsets[k]);
    const auto len = static_cast<Eigen::Index>(view_.models[k].size());
    FeederPrediction pred = view_.models[k].predict(p.segment(off, len), q.segment(off, len));
    snap.v.push_back(std::move(pred.v));
    snap.p_substation.push_back(pred.p_substation);
    snap.losses.push_back(0.0);
  }
  return snap;
}

void OperatorAgent::initialize_slack(const Eigen::VectorXd& p_m, const FlowSnapshot& flows) {
  if (!slack_.initialized()) slack_.record(slack_output(view_.total_p0, p_m, flows.p_substation));
}

double OperatorAgent::residual(const Eigen::VectorXd& p_m, const FlowSnapshot& flows) const {
  return slack_residual(slack_, view_.total_p0, p_m, flows.p_substation);
}

void OperatorAgent::update_duals(const Eigen::VectorXd& p_m, const FlowSnapshot& flows) {
  const double eps = config_.epsilon;
  const double eta = config_.eta;
  DualState next;
  const double grad_lambda = residual(p_m, flows) - eta * y_.lambda;
  next.lambda = y_.lambda + eps * grad_lambda;
  for (std::size_t k = 0; k < y_.mu.size(); ++k) {
    const Eigen::VectorXd grad = voltage_constraint(flows.v[k], view_.limits) - eta * y_.mu[k];
    next.mu.push_back((y_.mu[k] + eps * grad).cwiseMax(0.0));
  }
  y_ = std::move(next);
}

IncentiveSignals OperatorAgent::signals(std::size_t tag) const {
  const double der_lambda = config_.zero_lambda_for_ders ? 0.0 : y_.lambda;
  return compute_signals(view_.models, y_.lambda, der_lambda, y_.mu, tag);
}

MarketEngine::MarketEngine(const Problem& problem, const SolverConfig& config, const PrimalState& x0,
                           const DualState& y0, MarketOptions options)
    : problem_(problem),
      config_(config),
      options_(std::move(options)),
      operator_(OperatorView::from_problem(problem), config, y0),
      status_(DeviceStatus::from_system(problem.system())) {
  config_.validate();
  if (config_.order != StepOrder::kSequential) {
    throw ModelError("the market runs sequential rounds only");
  }
  problem_.check_layout(x0);
  problem_.check_layout(y0);
  bus_.set_fault_injector(options_.faults);

  const CoupledSystem& system = problem.system();
  const CostTable& costs = problem.costs();
  for (std::size_t k = 0; k < system.feeder_count(); ++k) {
    const DistributionFeeder& f = system.feeder(k);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (const Der* der = f.der_at(i)) {
        const std::size_t g = system.global_index(k, i);
        const auto gi = static_cast<Eigen::Index>(g);
        ders_.emplace_back("der:" + f.id() + ":" + to_string(f.network().nodes()[i].id), g, k, i, *der,
                           costs.der_p[g], costs.der_q[g], x0.p(gi), x0.q(gi));
      }
    }
  }
  const auto& gens = problem.transmission().generators();
  for (std::size_t j = 0; j < gens.size(); ++j) {
    generators_.emplace_back("gen:" + std::to_string(j + 1), j, gens[j], costs.generator[j],
                             x0.p_m(static_cast<Eigen::Index>(j)));
  }

  gather(0);
  operator_.initialize_slack(x_.p_m, flows_);
  signals_ = operator_.signals(0);
}

void MarketEngine::gather(std::size_t tag) {
  for (const DerAgent& a : ders_) {
    bus_.post({MessageKind::kSetpointReport, a.name(), tag, DerReport{a.global(), a.p(), a.q()}});
  }
  for (const GeneratorAgent& a : generators_) {
    bus_.post({MessageKind::kSetpointReport, a.name(), tag, GeneratorReport{a.index(), a.p_m()}});
  }
  const auto reports = bus_.collect(MessageKind::kSetpointReport, tag);
  if (reports.size() != ders_.size() + generators_.size()) {
    throw SolverError("round aborted: expected " + std::to_string(ders_.size() + generators_.size()) +
                      " setpoint reports, got " + std::to_string(reports.size()));
  }
  const auto n = static_cast<Eigen::Index>(problem_.node_count());
  PrimalState x{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(generators_.size()))};
  for (const AgentMessage& m : reports) {
    if (const auto* r = std::get_if<DerReport>(&m.payload)) {
      x.p(static_cast<Eigen::Index>(r->global)) = r->p;
      x.q(static_cast<Eigen::Index>(r->global)) = r->q;
    } else if (const auto* g = std::get_if<GeneratorReport>(&m.payload)) {
      x.p_m(static_cast<Eigen::Index>(g->generator)) = g->p_m;
    }
  }
  x_ = std::move(x);

  const FlowSnapshot computed = operator_.power_flow(x_.p, x_.q, tag);
  for (std::size_t k = 0; k < computed.v.size(); ++k) {
    bus_.post({MessageKind::kPfResult, "operator", tag,
               PfResult{k, computed.v[k], computed.p_substation[k], computed.losses[k]}});
  }
  const auto results = bus_.collect(MessageKind::kPfResult, tag);
  if (results.size() != computed.v.size()) {
    throw SolverError("round aborted: expected one pf-result per feeder");
  }
  FlowSnapshot flows;
  flows.source = computed.source;
  flows.iteration_tag = tag;
  flows.sweep_iterations = computed.sweep_iterations;
  flows.residual = computed.residual;
  flows.v.resize(results.size());
  flows.p_substation.resize(results.size());
  flows.losses.resize(results.size());
  for (const AgentMessage& m : results) {
    const auto& r = std::get<PfResult>(m.payload);
    flows.v.at(r.feeder) = r.v;
    flows.p_substation.at(r.feeder) = r.p_substation;
    flows.losses.at(r.feeder) = r.losses;
  }
  flows_ = std::move(flows);
}

void MarketEngine::apply(const DispatchEvent& event) {
  event.validate(problem_);
  if (event.kind == EventKind::kGeneratorOutage) {
    generators_.at(*event.generator).go_offline();
    status_.generator_online[*event.generator] = false;
  } else {
    for (DerAgent& a : ders_) a.scale_capacity(event.factor);
    for (double& s : status_.der_scale) s *= event.factor;
  }
  gather(flows_.iteration_tag);
}

void MarketEngine::step(std::size_t tag) {
  bus_.flush();
  bus_.post({MessageKind::kSignalBroadcast, "operator", tag, signals_});
  const auto broadcast = bus_.collect(MessageKind::kSignalBroadcast, tag);
  if (broadcast.size() != 1) throw SolverError("round aborted: expected exactly one broadcast");
  const auto& prices = std::get<IncentiveSignals>(broadcast.front().payload);

  const CoupledSystem& system = problem_.system();
  for (DerAgent& a : ders_) {
    const DerSlot s = system.slot(a.global());
    const double alpha = prices.alpha[s.feeder](static_cast<Eigen::Index>(s.node));
    const double beta = prices.beta[s.feeder](static_cast<Eigen::Index>(s.node));
    if (options_.mode == UserMode::kGradient) {
      a.gradient_step(alpha, beta, config_.epsilon);
    } else {
      a.best_response(alpha, beta);
    }
  }
  for (GeneratorAgent& g : generators_) g.step(prices.lambda, config_.epsilon);

  gather(tag + 1);

  operator_.update_duals(x_.p_m, flows_);
  bus_.post({MessageKind::kDualUpdate, "operator", tag + 1,
             DualUpdate{operator_.dual().lambda, operator_.dual().mu}});
  const auto updates = bus_.collect(MessageKind::kDualUpdate, tag + 1);
  if (updates.size() != 1) throw SolverError("round aborted: expected exactly one dual update");

  signals_ = operator_.signals(tag + 1);
  if (options_.check_signals) {
    const auto& d = std::get<DualUpdate>(updates.front().payload);
    const double der_lambda = config_.zero_lambda_for_ders ? 0.0 : d.lambda;
    const IncentiveSignals expect = compute_signals(problem_.models(), d.lambda, der_lambda, d.mu, tag + 1);
    for (std::size_t k = 0; k < expect.alpha.size(); ++k) {
      if (expect.alpha[k] != signals_.alpha[k] || expect.beta[k] != signals_.beta[k]) {
        throw SolverError("broadcast prices of feeder " + std::to_string(k) +
                          " do not match the published multipliers");
      }
    }
  }
}

SolveResult run_market(const Problem& problem, const SolverConfig& config,
                       const std::vector<DispatchEvent>& events, const InitOptions& init,
                       MarketOptions options, const IterationObserver& observer) {
  const DeviceStatus status = DeviceStatus::from_system(problem.system());
  MarketEngine engine(problem, config, make_initial_primal(problem, status, init),
                      make_initial_dual(problem, init), std::move(options));
  return drive(engine, config, events, observer);
}

}  // namespace tdco
