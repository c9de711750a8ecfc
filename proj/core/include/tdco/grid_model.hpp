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

// Network models for the transmission system and the radial distribution
// feeders attached to it. All quantities are per-unit on the model's
// base_mva. Injections into the network are positive; consumption is
// negative. Feeder loads are stored as consumption (positive = load).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tdco/ids.hpp"

namespace tdco {

/// Closed interval [lo, hi].
struct Box {
  double lo = 0.0;
  double hi = 0.0;

  bool degenerate() const { return lo == hi; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
};

struct VoltageLimits {
  double v_min = 0.95;
  double v_max = 1.05;

  /// Throws ModelError unless 0 < v_min < v_max.
  void validate() const;
};

// --------------------------------------------------------------------------
// Transmission level

struct Bus {
  BusId id;
  double p0 = 0.0;  ///< uncontrollable real injection
};

struct TransmissionLine {
  BusId from;
  BusId to;
};

struct Generator {
  GeneratorId id;
  BusId bus;
  double cost = 1.0;  ///< c in c * P^2
  double p_min = 0.0;
  double p_max = 0.0;
  double setpoint_initial = 0.0;
  bool online = true;

  Box box() const { return online ? Box{p_min, p_max} : Box{0.0, 0.0}; }
};

class TransmissionSystem {
 public:
  /// Validates and builds. Throws CaseError on duplicate ids, dangling
  /// references, a disconnected line graph or an unknown slack bus.
  static TransmissionSystem build(std::string name, double base_mva, std::vector<Bus> buses,
                                  std::vector<TransmissionLine> lines,
                                  std::vector<Generator> generators, BusId slack_bus);

  const std::string& name() const { return name_; }
  double base_mva() const { return base_mva_; }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<TransmissionLine>& lines() const { return lines_; }
  const std::vector<Generator>& generators() const { return generators_; }
  BusId slack_bus() const { return slack_bus_; }

  bool has_bus(BusId id) const { return bus_index_.contains(id); }
  std::size_t bus_index(BusId id) const;
  /// Position of the generator in generators(); throws CaseError if unknown.
  std::size_t generator_index(GeneratorId id) const;
  bool has_generator_at(BusId id) const;

  /// Sum of P0 over all buses.
  double total_p0() const;

  /// Copy with P0 of the given buses set to zero.
  TransmissionSystem with_zeroed_p0(std::span<const BusId> buses) const;

 private:
  TransmissionSystem() = default;

  std::string name_;
  double base_mva_ = 100.0;
  std::vector<Bus> buses_;
  std::vector<TransmissionLine> lines_;
  std::vector<Generator> generators_;
  BusId slack_bus_;
  std::unordered_map<BusId, std::size_t> bus_index_;
};

// --------------------------------------------------------------------------
// Distribution level

struct FeederNode {
  NodeId id;
  double p_load = 0.0;  ///< real consumption
  double q_load = 0.0;  ///< reactive consumption
};

/// Directed parent -> child line.
struct FeederLine {
  NodeId from;
  NodeId to;
  double r = 0.0;
  double x = 0.0;
};

/// Radial feeder topology with loads and impedances. The substation is not a
/// node: the N non-substation nodes are connected by exactly N lines, one of
/// which (or more) leaves the substation.
class FeederNetwork {
 public:
  static FeederNetwork build(std::string name, double base_mva, NodeId substation, double v0,
                             std::vector<FeederNode> nodes, std::vector<FeederLine> lines);

  const std::string& name() const { return name_; }
  double base_mva() const { return base_mva_; }
  NodeId substation() const { return substation_; }
  double v0() const { return v0_; }
  const std::vector<FeederNode>& nodes() const { return nodes_; }
  const std::vector<FeederLine>& lines() const { return lines_; }
  std::size_t size() const { return nodes_.size(); }

  bool has_node(NodeId id) const { return node_index_.contains(id); }
  std::size_t node_index(NodeId id) const;

  /// Parent node position, or nullopt when the parent is the substation.
  std::optional<std::size_t> parent(std::size_t node) const { return parent_[node]; }
  /// Line feeding `node` from its parent.
  const FeederLine& line_into(std::size_t node) const { return lines_[line_into_[node]]; }
  const std::vector<std::size_t>& children(std::size_t node) const { return children_[node]; }
  /// Nodes fed directly from the substation.
  const std::vector<std::size_t>& roots() const { return roots_; }
  /// Breadth-first order starting at the substation: parents precede children.
  const std::vector<std::size_t>& order() const { return order_; }

  /// Sum of |r + jx| along the substation -> node path.
  double path_impedance(std::size_t node) const;

  /// Same network with powers converted from this base to `new_base_mva`
  /// (impedances scale inversely).
  FeederNetwork rebased(double new_base_mva) const;

 private:
  friend class DistributionFeeder;
  FeederNetwork() = default;
  void index_topology();

  std::string name_;
  double base_mva_ = 1.0;
  NodeId substation_;
  double v0_ = 1.0;
  std::vector<FeederNode> nodes_;
  std::vector<FeederLine> lines_;

  std::unordered_map<NodeId, std::size_t> node_index_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::size_t> line_into_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> roots_;
  std::vector<std::size_t> order_;
};

/// Checks the radial-tree invariants on raw data without building. Returns
/// an empty string when the edge set is a tree rooted at the substation,
/// otherwise a message naming the offending element.
std::string radiality_violation(NodeId substation, std::span<const FeederNode> nodes,
                                std::span<const FeederLine> lines);

struct Der {
  NodeId node;
  double a_p = 1.0;  ///< cost a_p * p^2
  double a_q = 0.1;  ///< cost a_q * q^2
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double capacity_scale = 1.0;

  Box p_box() const { return {capacity_scale * p_min, capacity_scale * p_max}; }
  Box q_box() const { return {capacity_scale * q_min, capacity_scale * q_max}; }
  void validate() const;
};

class DistributionFeeder {
 public:
  /// Throws CaseError when a DER references an unknown node, two DERs share
  /// a node, or a DER violates its invariants.
  static DistributionFeeder build(std::string id, std::optional<BusId> host_bus,
                                  FeederNetwork network, std::vector<Der> ders);

  const std::string& id() const { return id_; }
  std::optional<BusId> host_bus() const { return host_bus_; }
  const FeederNetwork& network() const { return network_; }
  const std::vector<Der>& ders() const { return ders_; }
  std::size_t size() const { return network_.size(); }

  /// DER installed at node position `node`, if any.
  const Der* der_at(std::size_t node) const;

  DistributionFeeder with_host(BusId bus) const;
  DistributionFeeder rebased(double new_base_mva) const;

 private:
  DistributionFeeder() = default;

  std::string id_;
  std::optional<BusId> host_bus_;
  FeederNetwork network_;
  std::vector<Der> ders_;
  std::vector<std::optional<std::size_t>> der_of_node_;
};

}  // namespace tdco
