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

#include "tdco/coupled_system.hpp"

#include <unordered_set>

namespace tdco {

CoupledSystem attach_feeders(TransmissionSystem ts, std::vector<DistributionFeeder> feeders,
                             const AttachOptions& options) {
  std::unordered_set<BusId> hosts;
  std::unordered_set<std::string> ids;
  std::vector<BusId> host_list;
  for (const auto& f : feeders) {
    if (!f.host_bus()) throw CaseError("feeder " + f.id() + " has no host bus");
    const BusId host = *f.host_bus();
    if (!ts.has_bus(host)) {
      throw CaseError("feeder " + f.id() + ": host bus " + to_string(host) + " is unknown");
    }
    if (host == ts.slack_bus()) {
      throw CaseError("feeder " + f.id() + ": host bus " + to_string(host) + " is the slack bus");
    }
    if (!hosts.insert(host).second) {
      throw CaseError("feeder " + f.id() + ": duplicate host bus " + to_string(host));
    }
    if (!ids.insert(f.id()).second) throw CaseError("duplicate feeder id " + f.id());
    host_list.push_back(host);
  }
  if (options.replace_host_load) ts = ts.with_zeroed_p0(host_list);

  CoupledSystem cs(std::move(ts));
  const double base = cs.transmission_.base_mva();
  for (std::size_t k = 0; k < feeders.size(); ++k) {
    DistributionFeeder f = feeders[k].network().base_mva() == base
                               ? std::move(feeders[k])
                               : feeders[k].rebased(base);
    cs.offsets_.push_back(cs.node_count_);
    for (std::size_t i = 0; i < f.size(); ++i) cs.slots_.push_back({k, i});
    cs.node_count_ += f.size();
    cs.feeders_.push_back(std::move(f));
  }
  return cs;
}

std::size_t CoupledSystem::global_index(std::size_t feeder, std::size_t node) const {
  if (feeder >= feeders_.size() || node >= feeders_[feeder].size()) {
    throw ModelError("feeder/node position out of range");
  }
  return offsets_[feeder] + node;
}

DerSlot CoupledSystem::slot(std::size_t global) const {
  if (global >= slots_.size()) throw ModelError("global DER position out of range");
  return slots_[global];
}

std::size_t CoupledSystem::feeder_index(const std::string& id) const {
  for (std::size_t k = 0; k < feeders_.size(); ++k) {
    if (feeders_[k].id() == id) return k;
  }
  throw CaseError("unknown feeder " + id);
}

}  // namespace tdco
