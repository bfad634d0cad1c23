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

#include "veridical/timestamp.h"

#include "veridical/error.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <memory>

namespace veridical {

Timestamp Timestamp::now() {
  using namespace std::chrono;
  return {duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

std::string Timestamp::to_string() const {
  std::int64_t secs = unix_ms / 1000;
  std::int64_t ms = unix_ms % 1000;
  if (ms < 0) {
    ms += 1000;
    --secs;
  }
  std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

Timestamp Timestamp::parse(std::string_view iso8601) {
  std::string s(iso8601);
  std::tm tm{};
  int ms = 0;
  int consumed = 0;
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                      &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed);
  if (n != 6) throw Error(ErrorCode::kMalformedRecord, "bad timestamp '" + s + "'");
  std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    int digits = 0;
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') {
      if (digits < 3) ms = ms * 10 + (rest.front() - '0');
      ++digits;
      rest.remove_prefix(1);
    }
    if (digits == 0) throw Error(ErrorCode::kMalformedRecord, "bad timestamp '" + s + "'");
    for (int d = digits; d < 3; ++d) ms *= 10;
  }
  if (rest != "Z") throw Error(ErrorCode::kMalformedRecord, "timestamp must be UTC ('Z'): '" + s + "'");
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::int64_t secs = timegm(&tm);
  return {secs * 1000 + ms};
}

Clock system_clock() {
  return [] { return Timestamp::now(); };
}

Clock stepping_clock(Timestamp start, std::int64_t step_ms) {
  auto next = std::make_shared<std::atomic<std::int64_t>>(start.unix_ms);
  return [next, step_ms] { return Timestamp{next->fetch_add(step_ms)}; };
}

}  // namespace veridical
