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

#include <stdexcept>
#include <string>
#include <string_view>

namespace veridical {

// Every failure the library reports carries one of these codes so callers
// (CLI exit paths, HTTP status mapping, tests) can branch without parsing
// message text.
enum class ErrorCode {
  // ingestion
  kMalformedRecord,
  kDuplicateInstanceId,
  kProbabilityNotNormalized,
  kRejectedPrecondition,
  // uncertainty
  kNotNormalized,
  kSingleClass,
  kEmptySequence,
  kInvalidWindow,
  kEmptyDataset,
  kMissingLabel,
  // triage
  kEmptyInput,
  kTargetTooLarge,
  kInvalidConfig,
  // agreement
  kUnequalRaterCounts,
  kUnknownCategory,
  kDegenerateMatrix,
  kItemMismatch,
  kDuplicateAnnotation,
  // stability
  kEmptySaliency,
  kBadWeights,
  // gate
  kMissingMetric,
  kEmptyState,
  // provenance
  kMissingField,
  kWeakKey,
  kStoreUnavailable,
  kLedgerAppendConflict,
  // audit
  kChainBroken,
  kCasAlsoTampered,
  kEmptyStore,
  // service
  kNotFound,
  kConflict,
  kConfigInvalid,
  kBindFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Parse failure tied to a 1-based line of a record file.
class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& reason)
      : Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace veridical
