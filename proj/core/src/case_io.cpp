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

#include "tdco/case_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tdco {
namespace {

using nlohmann::json;

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw CaseError("syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

// Field access with messages that name the element being read.
template <class T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw CaseError(where + ": missing field \"" + key + "\"");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw CaseError(where + ": field \"" + key + "\" has the wrong type");
  }
}

template <class T>
T optional_field(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return required<T>(obj, key, where);
}

const json& required_array(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_array()) {
    throw CaseError(where + ": field \"" + key + "\" must be an array");
  }
  return obj.at(key);
}

void expect_kind(const json& doc, std::string_view kind) {
  if (!doc.is_object()) throw CaseError("case file must be a JSON object");
  const auto actual = required<std::string>(doc, "kind", "case");
  if (actual != kind) {
    throw CaseError("expected a \"" + std::string(kind) + "\" case, got \"" + actual + "\"");
  }
}

TransmissionSystem transmission_from_json(const json& doc) {
  expect_kind(doc, "transmission");
  const std::string name = optional_field<std::string>(doc, "name", "transmission", "case");
  const double base = required<double>(doc, "base_mva", name);

  std::vector<Bus> buses;
  for (const auto& b : required_array(doc, "buses", name)) {
    const std::string where = name + " bus";
    buses.push_back({BusId{required<int>(b, "id", where)}, optional_field(b, "p0", 0.0, where)});
  }
  std::vector<TransmissionLine> lines;
  for (const auto& l : required_array(doc, "lines", name)) {
    const std::string where = name + " line";
    lines.push_back({BusId{required<int>(l, "from", where)}, BusId{required<int>(l, "to", where)}});
  }
  std::vector<Generator> gens;
  int ordinal = 0;
  for (const auto& g : required_array(doc, "generators", name)) {
    ++ordinal;
    const std::string where = name + " generator " + std::to_string(ordinal);
    Generator gen;
    gen.id = GeneratorId{optional_field(g, "id", ordinal, where)};
    gen.bus = BusId{required<int>(g, "bus", where)};
    gen.cost = required<double>(g, "cost", where);
    gen.p_min = required<double>(g, "p_min", where);
    gen.p_max = required<double>(g, "p_max", where);
    gen.setpoint_initial = optional_field(g, "p_init", 0.5 * (gen.p_min + gen.p_max), where);
    gen.online = optional_field(g, "online", true, where);
    gens.push_back(gen);
  }
  const BusId slack{required<int>(doc, "slack_bus", name)};
  return TransmissionSystem::build(name, base, std::move(buses), std::move(lines), std::move(gens),
                                   slack);
}

DistributionFeeder feeder_from_json(const json& doc) {
  expect_kind(doc, "feeder");
  const std::string name = optional_field<std::string>(doc, "name", "feeder", "case");
  const double base = required<double>(doc, "base_mva", name);
  if (!doc.contains("substation") || !doc.at("substation").is_object()) {
    throw CaseError(name + ": field \"substation\" must be an object");
  }
  const auto& sub = doc.at("substation");
  const NodeId sub_id{required<int>(sub, "id", name + " substation")};
  const double v0 = optional_field(sub, "v0", 1.0, name + " substation");

  std::vector<FeederNode> nodes;
  for (const auto& n : required_array(doc, "nodes", name)) {
    const std::string where = name + " node";
    nodes.push_back({NodeId{required<int>(n, "id", where)}, optional_field(n, "p_load", 0.0, where),
                     optional_field(n, "q_load", 0.0, where)});
  }
  std::vector<FeederLine> lines;
  for (const auto& l : required_array(doc, "lines", name)) {
    const std::string where = name + " line";
    lines.push_back({NodeId{required<int>(l, "from", where)}, NodeId{required<int>(l, "to", where)},
                     required<double>(l, "r", where), required<double>(l, "x", where)});
  }
  std::vector<Der> ders;
  if (doc.contains("ders")) {
    for (const auto& d : required_array(doc, "ders", name)) {
      const std::string where = name + " der";
      Der der;
      der.node = NodeId{required<int>(d, "node", where)};
      der.a_p = required<double>(d, "a_p", where);
      der.a_q = required<double>(d, "a_q", where);
      der.p_min = required<double>(d, "p_min", where);
      der.p_max = required<double>(d, "p_max", where);
      der.q_min = required<double>(d, "q_min", where);
      der.q_max = required<double>(d, "q_max", where);
      der.capacity_scale = optional_field(d, "capacity_scale", 1.0, where);
      ders.push_back(der);
    }
  }
  std::optional<BusId> host;
  if (doc.contains("host_bus")) host = BusId{required<int>(doc, "host_bus", name)};

  auto network =
      FeederNetwork::build(name, base, sub_id, v0, std::move(nodes), std::move(lines));
  const std::string id = optional_field<std::string>(doc, "id", name, name);
  return DistributionFeeder::build(id, host, std::move(network), std::move(ders));
}

}  // namespace

CaseModel parse_case(std::string_view text, CaseKind kind) {
  if (kind == CaseKind::kTransmission) return parse_transmission(text);
  return parse_feeder(text);
}

TransmissionSystem parse_transmission(std::string_view text) {
  return transmission_from_json(parse_json(text));
}

DistributionFeeder parse_feeder(std::string_view text) {
  return feeder_from_json(parse_json(text));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaseError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

TransmissionSystem load_transmission(const std::filesystem::path& path) {
  try {
    return parse_transmission(read_text_file(path));
  } catch (const CaseError& e) {
    throw CaseError(path.filename().string() + ": " + e.what());
  }
}

DistributionFeeder load_feeder(const std::filesystem::path& path) {
  try {
    return parse_feeder(read_text_file(path));
  } catch (const CaseError& e) {
    throw CaseError(path.filename().string() + ": " + e.what());
  }
}

std::string serialize(const TransmissionSystem& ts) {
  json doc;
  doc["kind"] = "transmission";
  doc["name"] = ts.name();
  doc["base_mva"] = ts.base_mva();
  doc["slack_bus"] = ts.slack_bus().value;
  doc["buses"] = json::array();
  for (const auto& b : ts.buses()) doc["buses"].push_back({{"id", b.id.value}, {"p0", b.p0}});
  doc["lines"] = json::array();
  for (const auto& l : ts.lines()) {
    doc["lines"].push_back({{"from", l.from.value}, {"to", l.to.value}});
  }
  doc["generators"] = json::array();
  for (const auto& g : ts.generators()) {
    doc["generators"].push_back({{"id", g.id.value},
                                 {"bus", g.bus.value},
                                 {"cost", g.cost},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"p_init", g.setpoint_initial},
                                 {"online", g.online}});
  }
  return doc.dump(1);
}

std::string serialize(const DistributionFeeder& feeder) {
  const FeederNetwork& net = feeder.network();
  json doc;
  doc["kind"] = "feeder";
  doc["name"] = net.name();
  doc["id"] = feeder.id();
  doc["base_mva"] = net.base_mva();
  if (feeder.host_bus()) doc["host_bus"] = feeder.host_bus()->value;
  doc["substation"] = {{"id", net.substation().value}, {"v0", net.v0()}};
  doc["nodes"] = json::array();
  for (const auto& n : net.nodes()) {
    doc["nodes"].push_back({{"id", n.id.value}, {"p_load", n.p_load}, {"q_load", n.q_load}});
  }
  doc["lines"] = json::array();
  for (const auto& l : net.lines()) {
    doc["lines"].push_back({{"from", l.from.value}, {"to", l.to.value}, {"r", l.r}, {"x", l.x}});
  }
  doc["ders"] = json::array();
  for (const auto& d : feeder.ders()) {
    doc["ders"].push_back({{"node", d.node.value},
                           {"a_p", d.a_p},
                           {"a_q", d.a_q},
                           {"p_min", d.p_min},
                           {"p_max", d.p_max},
                           {"q_min", d.q_min},
                           {"q_max", d.q_max},
                           {"capacity_scale", d.capacity_scale}});
  }
  return doc.dump(1);
}

}  // namespace tdco
