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

#include "tdco/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace tdco {

void VoltageLimits::validate() const {
  if (!(v_min > 0.0 && v_min < v_max)) {
    std::ostringstream os;
    os << "voltage limits must satisfy 0 < v_min < v_max (got " << v_min << ", " << v_max << ")";
    throw ModelError(os.str());
  }
}

// --------------------------------------------------------------------------

TransmissionSystem TransmissionSystem::build(std::string name, double base_mva,
                                             std::vector<Bus> buses,
                                             std::vector<TransmissionLine> lines,
                                             std::vector<Generator> generators, BusId slack_bus) {
  if (!(base_mva > 0.0)) throw CaseError("transmission base_mva must be positive");
  if (buses.empty()) throw CaseError("transmission system has no buses");

  TransmissionSystem ts;
  ts.name_ = std::move(name);
  ts.base_mva_ = base_mva;
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!ts.bus_index_.emplace(buses[i].id, i).second) {
      throw CaseError("duplicate bus id " + to_string(buses[i].id));
    }
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (BusId end : {lines[i].from, lines[i].to}) {
      if (!ts.bus_index_.contains(end)) {
        throw CaseError("line " + std::to_string(i) + " references unknown bus " + to_string(end));
      }
    }
  }
  std::unordered_set<GeneratorId> gen_ids;
  for (const Generator& g : generators) {
    if (!gen_ids.insert(g.id).second) {
      throw CaseError("duplicate generator id " + to_string(g.id));
    }
    if (!ts.bus_index_.contains(g.bus)) {
      throw CaseError("generator " + to_string(g.id) + " references unknown bus " +
                      to_string(g.bus));
    }
    if (g.p_min > g.p_max) {
      throw CaseError("generator " + to_string(g.id) + " has p_min > p_max");
    }
    if (!(g.cost > 0.0)) {
      throw CaseError("generator " + to_string(g.id) + " needs a positive cost coefficient");
    }
  }
  if (!ts.bus_index_.contains(slack_bus)) {
    throw CaseError("slack bus " + to_string(slack_bus) + " is not a bus of the system");
  }

  // Connectivity of the undirected line graph.
  std::vector<std::vector<std::size_t>> adj(buses.size());
  for (const auto& l : lines) {
    const auto a = ts.bus_index_.at(l.from);
    const auto b = ts.bus_index_.at(l.to);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(buses.size(), false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    for (auto w : adj[u]) {
      if (!seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
    }
  }
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!seen[i]) throw CaseError("bus " + to_string(buses[i].id) + " is not connected");
  }

  ts.buses_ = std::move(buses);
  ts.lines_ = std::move(lines);
  ts.generators_ = std::move(generators);
  ts.slack_bus_ = slack_bus;
  return ts;
}

std::size_t TransmissionSystem::bus_index(BusId id) const {
  auto it = bus_index_.find(id);
  if (it == bus_index_.end()) throw CaseError("unknown bus " + to_string(id));
  return it->second;
}

std::size_t TransmissionSystem::generator_index(GeneratorId id) const {
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    if (generators_[i].id == id) return i;
  }
  throw CaseError("unknown generator " + to_string(id));
}

bool TransmissionSystem::has_generator_at(BusId id) const {
  return std::any_of(generators_.begin(), generators_.end(),
                     [id](const Generator& g) { return g.bus == id; });
}

double TransmissionSystem::total_p0() const {
  double total = 0.0;
  for (const Bus& b : buses_) total += b.p0;
  return total;
}

TransmissionSystem TransmissionSystem::with_zeroed_p0(std::span<const BusId> ids) const {
  TransmissionSystem copy = *this;
  for (BusId id : ids) copy.buses_[copy.bus_index(id)].p0 = 0.0;
  return copy;
}

// --------------------------------------------------------------------------

std::string radiality_violation(NodeId substation, std::span<const FeederNode> nodes,
                                std::span<const FeederLine> lines) {
  std::unordered_map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == substation) {
      return "node " + to_string(nodes[i].id) + " duplicates the substation id";
    }
    if (!index.emplace(nodes[i].id, i).second) {
      return "duplicate node id " + to_string(nodes[i].id);
    }
  }
  std::vector<int> parents(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> children(nodes.size() + 1);  // last slot: substation
  const std::size_t sub_slot = nodes.size();
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const FeederLine& l = lines[k];
    const std::string tag = "line " + to_string(l.from) + "->" + to_string(l.to);
    if (l.from == l.to) return tag + " is a self loop";
    if (l.to == substation) return "non-radial: " + tag + " enters the substation";
    if (l.from != substation && !index.contains(l.from)) {
      return tag + " references unknown node " + to_string(l.from);
    }
    if (!index.contains(l.to)) return tag + " references unknown node " + to_string(l.to);
    if (!(l.r >= 0.0)) return tag + " has negative resistance";
    const auto child = index.at(l.to);
    ++parents[child];
    children[l.from == substation ? sub_slot : index.at(l.from)].push_back(child);
  }
  if (lines.size() != nodes.size()) {
    return "non-radial: " + std::to_string(lines.size()) + " lines for " +
           std::to_string(nodes.size()) + " nodes";
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (parents[i] != 1) {
      return "non-radial: node " + to_string(nodes[i].id) + " has " + std::to_string(parents[i]) +
             " parents";
    }
  }
  std::vector<bool> seen(nodes.size(), false);
  std::vector<std::size_t> stack(children[sub_slot].begin(), children[sub_slot].end());
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    if (seen[u]) continue;
    seen[u] = true;
    for (auto w : children[u]) stack.push_back(w);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!seen[i]) {
      return "non-radial: node " + to_string(nodes[i].id) +
             " is on a cycle disconnected from the substation";
    }
  }
  return {};
}

FeederNetwork FeederNetwork::build(std::string name, double base_mva, NodeId substation, double v0,
                                   std::vector<FeederNode> nodes, std::vector<FeederLine> lines) {
  if (!(base_mva > 0.0)) throw CaseError("feeder " + name + ": base_mva must be positive");
  if (!(v0 > 0.0)) throw CaseError("feeder " + name + ": substation voltage must be positive");
  if (nodes.empty()) throw CaseError("feeder " + name + " has no nodes");
  if (auto why = radiality_violation(substation, nodes, lines); !why.empty()) {
    throw CaseError("feeder " + name + ": " + why);
  }
  FeederNetwork net;
  net.name_ = std::move(name);
  net.base_mva_ = base_mva;
  net.substation_ = substation;
  net.v0_ = v0;
  net.nodes_ = std::move(nodes);
  net.lines_ = std::move(lines);
  net.index_topology();
  return net;
}

void FeederNetwork::index_topology() {
  const std::size_t n = nodes_.size();
  node_index_.clear();
  for (std::size_t i = 0; i < n; ++i) node_index_.emplace(nodes_[i].id, i);
  parent_.assign(n, std::nullopt);
  line_into_.assign(n, 0);
  children_.assign(n, {});
  roots_.clear();
  for (std::size_t k = 0; k < lines_.size(); ++k) {
    const auto child = node_index_.at(lines_[k].to);
    line_into_[child] = k;
    if (lines_[k].from == substation_) {
      roots_.push_back(child);
    } else {
      const auto par = node_index_.at(lines_[k].from);
      parent_[child] = par;
      children_[par].push_back(child);
    }
  }
  order_.clear();
  order_.reserve(n);
  std::queue<std::size_t> frontier;
  for (auto r : roots_) frontier.push(r);
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop();
    order_.push_back(u);
    for (auto w : children_[u]) frontier.push(w);
  }
}

std::size_t FeederNetwork::node_index(NodeId id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) {
    throw CaseError("feeder " + name_ + ": unknown node " + to_string(id));
  }
  return it->second;
}

double FeederNetwork::path_impedance(std::size_t node) const {
  double total = 0.0;
  std::optional<std::size_t> cur = node;
  while (cur) {
    const FeederLine& l = line_into(*cur);
    total += std::hypot(l.r, l.x);
    cur = parent_[*cur];
  }
  return total;
}

FeederNetwork FeederNetwork::rebased(double new_base_mva) const {
  if (!(new_base_mva > 0.0)) throw ModelError("rebase target must be positive");
  const double power = base_mva_ / new_base_mva;
  FeederNetwork out = *this;
  out.base_mva_ = new_base_mva;
  for (auto& n : out.nodes_) {
    n.p_load *= power;
    n.q_load *= power;
  }
  for (auto& l : out.lines_) {
    l.r /= power;
    l.x /= power;
  }
  return out;
}

// --------------------------------------------------------------------------

void Der::validate() const {
  const std::string tag = "DER at node " + to_string(node);
  if (!(a_p > 0.0) || !(a_q > 0.0)) throw CaseError(tag + " needs positive cost coefficients");
  if (p_min > p_max) throw CaseError(tag + " has p_min > p_max");
  if (q_min > q_max) throw CaseError(tag + " has q_min > q_max");
  if (!(capacity_scale > 0.0)) throw CaseError(tag + " needs a positive capacity_scale");
}

DistributionFeeder DistributionFeeder::build(std::string id, std::optional<BusId> host_bus,
                                             FeederNetwork network, std::vector<Der> ders) {
  DistributionFeeder f;
  f.der_of_node_.assign(network.size(), std::nullopt);
  for (std::size_t k = 0; k < ders.size(); ++k) {
    ders[k].validate();
    if (!network.has_node(ders[k].node)) {
      throw CaseError("feeder " + id + ": DER references unknown node " + to_string(ders[k].node));
    }
    const auto pos = network.node_index(ders[k].node);
    if (f.der_of_node_[pos]) {
      throw CaseError("feeder " + id + ": duplicate DER at node " + to_string(ders[k].node));
    }
    f.der_of_node_[pos] = k;
  }
  f.id_ = std::move(id);
  f.host_bus_ = host_bus;
  f.network_ = std::move(network);
  f.ders_ = std::move(ders);
  return f;
}

const Der* DistributionFeeder::der_at(std::size_t node) const {
  const auto& slot = der_of_node_.at(node);
  return slot ? &ders_[*slot] : nullptr;
}

DistributionFeeder DistributionFeeder::with_host(BusId bus) const {
  DistributionFeeder copy = *this;
  copy.host_bus_ = bus;
  return copy;
}

DistributionFeeder DistributionFeeder::rebased(double new_base_mva) const {
  const double power = network_.base_mva() / new_base_mva;
  DistributionFeeder copy = *this;
  copy.network_ = network_.rebased(new_base_mva);
  for (auto& d : copy.ders_) {
    d.p_min *= power;
    d.p_max *= power;
    d.q_min *= power;
    d.q_max *= power;
  }
  return copy;
}

}  // namespace tdco
