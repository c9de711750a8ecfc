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

// Per-iteration CSV trace. The first line is a version comment, the second
// the column header; column order is fixed for a given problem layout.
// Values that do not apply are written as NA.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdco/solver.hpp"

namespace tdco {

inline constexpr const char* kTraceVersionLine = "# tdco-trace v1";

/// Shortest round-trip decimal form (std::to_chars); NA for non-finite input.
std::string format_number(double value);

/// Node whose alpha/beta prices a trace samples on one feeder.
struct ProbeNode {
  std::size_t feeder = 0;
  std::size_t node = 0;
};

/// Deepest leaf by path impedance; ties go to the lower position.
std::size_t deepest_node(const FeederNetwork& network);

class TraceWriter {
 public:
  /// One probe per feeder, in feeder order.
  TraceWriter(std::ostream& out, const Problem& problem, std::vector<ProbeNode> probes,
              bool zero_lambda_for_ders);

  std::vector<std::string> columns() const;
  void write_header();
  void write(const IterationView& view);

  std::size_t records() const { return records_; }

 private:
  std::ostream& out_;
  const Problem& problem_;
  std::vector<ProbeNode> probes_;
  bool zero_lambda_for_ders_;
  std::size_t records_ = 0;
};

/// A trace read back: header columns and numeric rows (NA becomes NaN).
struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws CaseError if absent.
  std::size_t column(const std::string& name) const;
};

/// Throws CaseError on a missing version line, a malformed row or a width
/// mismatch; the message names the line.
TraceTable parse_trace(const std::string& text);
TraceTable load_trace(const std::string& path);

}  // namespace tdco
