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

#include <cstddef>
#include <vector>

#include "tdco/grid_model.hpp"

namespace tdco {

/// Position of one feeder node in the global DER vectors p, q.
struct DerSlot {
  std::size_t feeder = 0;
  std::size_t node = 0;

  bool operator==(const DerSlot&) const = default;
};

struct AttachOptions {
  /// Zero the native P0 of every host bus, so the feeder draw replaces the
  /// bus demand instead of adding to it.
  bool replace_host_load = false;
};

/// A transmission system with radial feeders hanging off some of its buses.
/// Feeders are stored converted to the transmission base_mva.
class CoupledSystem {
 public:
  const TransmissionSystem& transmission() const { return transmission_; }
  const std::vector<DistributionFeeder>& feeders() const { return feeders_; }
  const DistributionFeeder& feeder(std::size_t k) const { return feeders_.at(k); }

  std::size_t feeder_count() const { return feeders_.size(); }
  std::size_t generator_count() const { return transmission_.generators().size(); }
  /// N = sum of feeder node counts.
  std::size_t node_count() const { return node_count_; }

  /// First global position of feeder k.
  std::size_t offset(std::size_t k) const { return offsets_.at(k); }
  std::size_t global_index(std::size_t feeder, std::size_t node) const;
  DerSlot slot(std::size_t global) const;

  /// Looks up a feeder by id; throws CaseError if absent.
  std::size_t feeder_index(const std::string& id) const;

 private:
  friend CoupledSystem attach_feeders(TransmissionSystem ts, std::vector<DistributionFeeder> feeders,
                                      const AttachOptions& options);

  TransmissionSystem transmission_;
  std::vector<DistributionFeeder> feeders_;
  std::vector<std::size_t> offsets_;
  std::vector<DerSlot> slots_;
  std::size_t node_count_ = 0;

  explicit CoupledSystem(TransmissionSystem ts) : transmission_(std::move(ts)) {}
};

/// Couples feeders to their host buses. Every feeder must carry a host bus
/// that exists, is not the slack bus and is not shared with another feeder.
CoupledSystem attach_feeders(TransmissionSystem ts, std::vector<DistributionFeeder> feeders,
                             const AttachOptions& options = {});

}  // namespace tdco
