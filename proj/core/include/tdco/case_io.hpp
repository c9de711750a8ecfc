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

// JSON case files. The schema is documented in docs/case_schema.md.

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "tdco/grid_model.hpp"

namespace tdco {

enum class CaseKind { kTransmission, kFeeder };

using CaseModel = std::variant<TransmissionSystem, DistributionFeeder>;

/// Parses case text of the requested kind. Syntax errors report the byte
/// offset; semantic errors name the offending element. Both throw CaseError.
CaseModel parse_case(std::string_view text, CaseKind kind);

TransmissionSystem parse_transmission(std::string_view text);
DistributionFeeder parse_feeder(std::string_view text);

TransmissionSystem load_transmission(const std::filesystem::path& path);
DistributionFeeder load_feeder(const std::filesystem::path& path);

std::string serialize(const TransmissionSystem& ts);
std::string serialize(const DistributionFeeder& feeder);

/// Reads a whole file; throws CaseError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tdco
