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

#include "veridical/trace_model.h"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace veridical {

// items x categories table of rater counts; each row sums to
// raters_per_item.
struct RatingsMatrix {
  std::vector<std::string> items;
  std::vector<std::string> categories;
  std::vector<std::vector<std::size_t>> counts;  // [item][category]
  std::size_t raters_per_item = 0;

  // Errors: kDegenerateMatrix for shape violations (n < 2, < 2 categories,
  // no items, a row not summing to n).
  void validate() const;
};

struct AgreementScore {
  double kappa = 0.0;
  double observed_agreement = 0.0;  // A_o
  double expected_agreement = 0.0;  // A_e
  double clamped_kappa = 0.0;       // max(0, kappa)
  std::vector<double> per_item_agreement;
  // Set when every rating fell in one category (A_e = 1); kappa is then 1.
  bool degenerate = false;
};

// What the raters judged: the decision itself, or one technique's explanation.
struct RatingTarget {
  enum class Kind { kDecision, kExplanation };
  Kind kind = Kind::kDecision;
  std::string technique_id;

  static RatingTarget decision() { return {}; }
  static RatingTarget explanation(std::string technique) {
    return {Kind::kExplanation, std::move(technique)};
  }
  // "decision" or "explanation:<technique>".
  static RatingTarget parse(std::string_view text);
  std::string to_string() const;
};

// Tabulates counts per item. Decision targets use {agree, disagree};
// explanation targets use {poor, moderate, good, excellent}.
// Errors: kUnequalRaterCounts (names the offending item), kEmptyInput.
RatingsMatrix build_matrix(std::span<const AnnotationRecord> annotations, const RatingTarget& target);

AgreementScore fleiss_kappa(const RatingsMatrix& matrix);

// Share of agreeing rater pairs per item, averaged over items.
double percent_agreement(const RatingsMatrix& matrix);

// Two raters, same items. Keys are item ids, values category labels.
// Errors: kItemMismatch when the item sets differ or are empty.
double cohen_kappa(const std::map<std::string, std::string>& ratings_a,
                   const std::map<std::string, std::string>& ratings_b);
double scott_pi(const std::map<std::string, std::string>& ratings_a,
                const std::map<std::string, std::string>& ratings_b);

// Expresses two raters' assignments as a 2-rater RatingsMatrix.
RatingsMatrix two_rater_matrix(const std::map<std::string, std::string>& ratings_a,
                               const std::map<std::string, std::string>& ratings_b);

Json to_json(const AgreementScore& score);

}  // namespace veridical
