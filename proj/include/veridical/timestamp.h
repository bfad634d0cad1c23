/*
 * Copyright 2026 The Veridical Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace veridical {

// UTC instant at millisecond resolution. Serialized as
// "YYYY-MM-DDTHH:MM:SS.mmmZ".
struct Timestamp {
  std::int64_t unix_ms = 0;

  static Timestamp now();
  static Timestamp parse(std::string_view iso8601);

  std::string to_string() const;

  auto operator<=>(const Timestamp&) const = default;
};

// Injected wherever records are stamped so tests can pin time.
using Clock = std::function<Timestamp()>;

Clock system_clock();

// Deterministic clock for tests and fixtures: start, start+step, ...
Clock stepping_clock(Timestamp start, std::int64_t step_ms = 1);

}  // namespace veridical
