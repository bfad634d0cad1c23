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

#include "veridical/error.h"

namespace veridical {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateInstanceId: return "DuplicateInstanceId";
    case ErrorCode::kProbabilityNotNormalized: return "ProbabilityNotNormalized";
    case ErrorCode::kRejectedPrecondition: return "RejectedPrecondition";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kInvalidWindow: return "InvalidWindow";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kTargetTooLarge: return "TargetTooLarge";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUnequalRaterCounts: return "UnequalRaterCounts";
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kDegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::kItemMismatch: return "ItemMismatch";
    case ErrorCode::kDuplicateAnnotation: return "DuplicateAnnotation";
    case ErrorCode::kEmptySaliency: return "EmptySaliency";
    case ErrorCode::kBadWeights: return "BadWeights";
    case ErrorCode::kMissingMetric: return "MissingMetric";
    case ErrorCode::kEmptyState: return "EmptyState";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kWeakKey: return "WeakKey";
    case ErrorCode::kStoreUnavailable: return "StoreUnavailable";
    case ErrorCode::kLedgerAppendConflict: return "LedgerAppendConflict";
    case ErrorCode::kChainBroken: return "ChainBroken";
    case ErrorCode::kCasAlsoTampered: return "CasAlsoTampered";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kBindFailure: return "BindFailure";
  }
  return "Unknown";
}

}  // namespace veridical
