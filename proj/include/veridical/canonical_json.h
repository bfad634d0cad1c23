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

#include <nlohmann/json.hpp>

#include <cstddef>
#include <string>
#include <string_view>

namespace veridical {

using Json = nlohmann::json;

// Canonical form: object keys in byte order, no insignificant whitespace,
// raw UTF-8 strings, decimals with at most 12 significant digits. Every
// hash in the system is taken over these bytes.
std::string canonical_dump(const Json& value);

// "%.12g" with -0 folded to 0. Throws on NaN/Inf.
std::string format_decimal(double value);

// Snaps a double onto the 12-significant-digit grid so that
// serialize -> parse is the identity.
double round_decimal(double value);

// Parses one record line; failures surface as MalformedRecord(line).
Json parse_record_line(std::string_view text, std::size_t line);

// Typed field accessors used by every record parser. They throw
// MalformedRecord naming the field.
const Json& require_field(const Json& object, std::string_view key, std::size_t line);
std::string require_string(const Json& object, std::string_view key, std::size_t line);
double require_number(const Json& object, std::string_view key, std::size_t line);

}  // namespace veridical
