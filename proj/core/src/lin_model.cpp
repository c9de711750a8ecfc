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

#include "tdco/lin_model.hpp"

namespace tdco {

FeederPrediction LinearFeederModel::predict(const Eigen::VectorXd& p,
                                            const Eigen::VectorXd& q) const {
  if (p.size() != c.size() || q.size() != c.size()) {
    throw ModelError("predict: injection vectors have size " + std::to_string(p.size()) + "/" +
                     std::to_string(q.size()) + ", model has " + std::to_string(c.size()) +
                     " nodes");
  }
  FeederPrediction out;
  out.v = a * p + b * q + c;
  out.p_substation = m.dot(p) + n.dot(q) + d;
  return out;
}

LinearFeederModel build_lindistflow(const FeederNetwork& network) {
  const auto size = static_cast<Eigen::Index>(network.size());
  const double v0 = network.v0();

  // Path resistance / reactance from the substation to every node, then the
  // shared-path value for a pair is the value at their deepest common
  // ancestor. Walking nodes in BFS order lets each row reuse its parent's.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i : network.order()) {
    const auto ii = static_cast<Eigen::Index>(i);
    const FeederLine& line = network.line_into(i);
    const auto parent = network.parent(i);
    if (parent) {
      const auto pp = static_cast<Eigen::Index>(*parent);
      // Every already-placed node j shares with i exactly what it shares
      // with i's parent, except i itself which gets the parent's diagonal
      // plus its own line.
      a.row(ii) = a.row(pp);
      b.row(ii) = b.row(pp);
      a.col(ii) = a.row(ii).transpose().eval();
      b.col(ii) = b.row(ii).transpose().eval();
      a(ii, ii) = a(pp, pp) + line.r / v0;
      b(ii, ii) = b(pp, pp) + line.x / v0;
    } else {
      a(ii, ii) = line.r / v0;
      b(ii, ii) = line.x / v0;
    }
  }

  Eigen::VectorXd p_inj(size);
  Eigen::VectorXd q_inj(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    p_inj(i) = -network.nodes()[static_cast<std::size_t>(i)].p_load;
    q_inj(i) = -network.nodes()[static_cast<std::size_t>(i)].q_load;
  }

  LinearFeederModel model;
  model.c = Eigen::VectorXd::Constant(size, v0) + a * p_inj + b * q_inj;
  model.m = Eigen::VectorXd::Constant(size, -1.0);
  model.n = Eigen::VectorXd::Zero(size);
  model.d = -p_inj.sum();
  model.a = std::move(a);
  model.b = std::move(b);
  return model;
}

}  // namespace tdco
