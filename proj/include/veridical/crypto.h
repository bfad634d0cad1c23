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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace veridical {

// Lowercase hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

// Streams the file; nullopt when it cannot be opened.
std::optional<std::string> sha256_file(const std::filesystem::path& path);

std::string hmac_sha256_hex(std::string_view key, std::string_view message);

// Standard alphabet with padding.
std::string base64_encode(std::string_view bytes);
// Strict: rejects bad length, characters and misplaced padding with
// kMalformedRecord.
std::string base64_decode(std::string_view text);

bool is_hex_digest(std::string_view s);

}  // namespace veridical
