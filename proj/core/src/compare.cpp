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

#include "tdco/compare.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace tdco {

CompareReport compare_runs(const TraceTable& a, const TraceTable& b, const std::string& metric) {
  const std::size_t ia = a.column("iteration");
  const std::size_t ib = b.column("iteration");
  const std::size_t ma = a.column(metric);
  const std::size_t mb = b.column(metric);
  if (a.rows.size() != b.rows.size()) {
    throw ModelError("horizon mismatch: " + std::to_string(a.rows.size()) + " vs " +
                     std::to_string(b.rows.size()) + " records");
  }
  if (a.rows.empty()) throw ModelError("horizon mismatch: both traces are empty");
  CompareReport r;
  r.metric = metric;
  for (std::size_t t = 0; t < a.rows.size(); ++t) {
    if (a.rows[t][ia] != b.rows[t][ib]) {
      throw ModelError("horizon mismatch at record " + std::to_string(t));
    }
    const double d = b.rows[t][mb] - a.rows[t][ma];
    r.iterations.push_back(a.rows[t][ia]);
    r.delta.push_back(d);
    r.max_abs_delta = std::max(r.max_abs_delta, std::abs(d));
  }
  r.final_a = a.rows.back()[ma];
  r.final_b = b.rows.back()[mb];
  r.final_delta = r.final_b - r.final_a;
  return r;
}

std::string CompareReport::to_json() const {
  nlohmann::json j{{"metric", metric},
                   {"records", delta.size()},
                   {"final_a", final_a},
                   {"final_b", final_b},
                   {"final_delta", final_delta},
                   {"max_abs_delta", max_abs_delta}};
  return j.dump(2);
}

}  // namespace tdco
