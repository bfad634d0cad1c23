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

#include "veridical/canonical_json.h"

#include "veridical/error.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace veridical {
namespace {

void dump_into(const Json& value, std::string& out) {
  switch (value.type()) {
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      // nlohmann's default object_t is a std::map, so iteration is already
      // in byte order of the keys.
      for (const auto& [key, item] : value.items()) {
        if (!first) out.push_back(',');
        first = false;
        out += Json(key).dump(-1, ' ', false, Json::error_handler_t::strict);
        out.push_back(':');
        dump_into(item, out);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out.push_back(',');
        first = false;
        dump_into(item, out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::number_float:
      out += format_decimal(value.get<double>());
      break;
    default:
      out += value.dump(-1, ' ', false, Json::error_handler_t::strict);
      break;
  }
}

}  // namespace

std::string canonical_dump(const Json& value) {
  std::string out;
  dump_into(value, out);
  return out;
}

std::string format_decimal(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kMalformedRecord, "non-finite decimal cannot be serialized");
  }
  if (value == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

double round_decimal(double value) {
  return std::strtod(format_decimal(value).c_str(), nullptr);
}

Json parse_record_line(std::string_view text, std::size_t line) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw MalformedRecord(line, e.what());
  }
}

const Json& require_field(const Json& object, std::string_view key, std::size_t line) {
  if (!object.is_object()) throw MalformedRecord(line, "record is not an object");
  auto it = object.find(std::string(key));
  if (it == object.end()) throw MalformedRecord(line, "missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const Json& object, std::string_view key, std::size_t line) {
  const Json& v = require_field(object, key, line);
  if (!v.is_string()) throw MalformedRecord(line, "field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

double require_number(const Json& object, std::string_view key, std::size_t line) {
  const Json& v = require_field(object, key, line);
  if (!v.is_number()) throw MalformedRecord(line, "field '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

}  // namespace veridical
