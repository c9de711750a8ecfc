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

#include "tdco/trace.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tdco/case_io.hpp"
#include "tdco/market.hpp"

namespace tdco {

std::string format_number(double value) {
  if (!std::isfinite(value)) return "NA";
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "NA";
  return std::string(buf.data(), end);
}

std::size_t deepest_node(const FeederNetwork& network) {
  if (network.size() == 0) throw ModelError("feeder " + network.name() + " has no nodes");
  std::size_t best = 0;
  double depth = -1.0;
  for (std::size_t i = 0; i < network.size(); ++i) {
    if (!network.children(i).empty()) continue;
    const double d = network.path_impedance(i);
    if (d > depth) {
      depth = d;
      best = i;
    }
  }
  return best;
}

TraceWriter::TraceWriter(std::ostream& out, const Problem& problem, std::vector<ProbeNode> probes,
                         bool zero_lambda_for_ders)
    : out_(out), problem_(problem), probes_(std::move(probes)), zero_lambda_for_ders_(zero_lambda_for_ders) {
  for (const ProbeNode& p : probes_) {
    if (p.feeder >= problem_.feeder_count() || p.node >= problem_.system().feeder(p.feeder).size()) {
      throw ModelError("trace probe outside the system layout");
    }
  }
}

std::vector<std::string> TraceWriter::columns() const {
  std::vector<std::string> cols{"iteration", "lambda"};
  for (const Generator& g : problem_.transmission().generators()) cols.push_back("pm_" + to_string(g.id));
  const auto& feeders = problem_.system().feeders();
  for (const auto& f : feeders) cols.push_back("pl_" + f.id());
  for (const auto& f : feeders) {
    cols.push_back("vmin_" + f.id());
    cols.push_back("vmax_" + f.id());
  }
  cols.push_back("slack_residual");
  cols.push_back("total_cost");
  for (const ProbeNode& p : probes_) {
    const auto& f = feeders[p.feeder];
    const std::string node = to_string(f.network().nodes()[p.node].id);
    cols.push_back("alpha_" + f.id() + "_" + node);
    cols.push_back("beta_" + f.id() + "_" + node);
  }
  cols.push_back("primal_step");
  cols.push_back("dual_step");
  return cols;
}

void TraceWriter::write_header() {
  out_ << kTraceVersionLine << '\n';
  const auto cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n';
}

void TraceWriter::write(const IterationView& view) {
  constexpr double na = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream row;
  row << view.iteration << ',' << format_number(view.y.lambda);
  for (Eigen::Index j = 0; j < view.x.p_m.size(); ++j) row << ',' << format_number(view.x.p_m(j));
  for (double pl : view.flows.p_substation) row << ',' << format_number(pl);
  for (const auto& v : view.flows.v) {
    row << ',' << format_number(v.size() ? v.minCoeff() : na) << ','
        << format_number(v.size() ? v.maxCoeff() : na);
  }
  row << ',' << format_number(view.residual) << ',' << format_number(problem_.total_cost(view.x));
  if (!probes_.empty()) {
    const double der_lambda = zero_lambda_for_ders_ ? 0.0 : view.y.lambda;
    const IncentiveSignals s =
        compute_signals(problem_.models(), view.y.lambda, der_lambda, view.y.mu, view.iteration);
    for (const ProbeNode& p : probes_) {
      const auto i = static_cast<Eigen::Index>(p.node);
      row << ',' << format_number(s.alpha[p.feeder](i)) << ',' << format_number(s.beta[p.feeder](i));
    }
  }
  row << ',' << format_number(view.primal_step.value_or(na)) << ','
      << format_number(view.dual_step.value_or(na));
  out_ << row.str() << '\n';
  ++records_;
}

std::size_t TraceTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw CaseError("trace has no column " + name);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TraceTable parse_trace(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kTraceVersionLine) {
    throw CaseError("trace line 1: expected \"" + std::string(kTraceVersionLine) + "\"");
  }
  TraceTable t;
  if (!std::getline(is, line)) throw CaseError("trace line 2: missing column header");
  t.columns = split(line);
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) {
      throw CaseError("trace line " + std::to_string(lineno) + ": expected " +
                      std::to_string(t.columns.size()) + " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      if (c == "NA") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const auto [end, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || end != c.data() + c.size()) {
        throw CaseError("trace line " + std::to_string(lineno) + ": bad number \"" + c + "\"");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

TraceTable load_trace(const std::string& path) {
  try {
    return parse_trace(read_text_file(path));
  } catch (const CaseError& e) {
    throw CaseError(path + ": " + e.what());
  }
}

}  // namespace tdco
