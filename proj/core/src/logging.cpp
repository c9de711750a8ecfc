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

#include "tdco/logging.hpp"

#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace tdco::log {

namespace {

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("tdco");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("TDCO_LOG_LEVEL")) {
      l->set_level(spdlog::level::from_str(env));
    }
    return l;
  }();
  return *instance;
}

std::mutex listener_mutex;
Listener listener;

void emit(Level level, spdlog::level::level_enum spd, std::string_view message) {
  spdlog::logger& l = logger();
  if (!l.should_log(spd)) return;
  l.log(spd, "{}", message);
  std::lock_guard lock(listener_mutex);
  if (listener) listener(level, message);
}

}  // namespace

void debug(std::string_view message) { emit(Level::kDebug, spdlog::level::debug, message); }
void info(std::string_view message) { emit(Level::kInfo, spdlog::level::info, message); }
void warn(std::string_view message) { emit(Level::kWarn, spdlog::level::warn, message); }
void error(std::string_view message) { emit(Level::kError, spdlog::level::err, message); }

void set_listener(Listener l) {
  std::lock_guard lock(listener_mutex);
  listener = std::move(l);
}

}  // namespace tdco::log
