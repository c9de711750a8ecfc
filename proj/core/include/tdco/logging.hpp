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

// Thin logging facade. The level comes from TDCO_LOG_LEVEL (trace, debug,
// info, warn, error, off); default warn.

#include <functional>
#include <string_view>

namespace tdco::log {

enum class Level { kDebug, kInfo, kWarn, kError };

void debug(std::string_view message);
void info(std::string_view message);
void warn(std::string_view message);
void error(std::string_view message);

/// Also hands every message that passes the level filter to `listener`.
/// An empty function removes it.
using Listener = std::function<void(Level, std::string_view)>;
void set_listener(Listener listener);

}  // namespace tdco::log
