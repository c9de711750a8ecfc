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

// Side-by-side comparison of two traces of the same scenario horizon.

#include <string>
#include <vector>

#include "tdco/trace.hpp"

namespace tdco {

struct CompareReport {
  std::string metric;
  std::vector<double> iterations;
  std::vector<double> delta;  ///< b - a per iteration
  double final_a = 0.0;
  double final_b = 0.0;
  double final_delta = 0.0;  ///< final_b - final_a
  double max_abs_delta = 0.0;

  std::string to_json() const;
};

/// Throws ModelError when the iteration columns differ (horizon mismatch)
/// and CaseError when `metric` is not a column of both traces.
CompareReport compare_runs(const TraceTable& a, const TraceTable& b,
                           const std::string& metric = "total_cost");

}  // namespace tdco
