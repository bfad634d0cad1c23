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

#include "veridical/human_eval.h"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>

namespace veridical {
namespace {

using Int = std::int64_t;

// num/den with the fraction reduced first so both halves convert to double
// exactly whenever they fit in 53 bits.
double ratio(__int128 num, __int128 den) {
  auto abs128 = [](__int128 v) { return v < 0 ? -v : v; };
  __int128 a = abs128(num);
  __int128 b = abs128(den);
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

const std::vector<std::string>& decision_categories() {
  static const std::vector<std::string> kCats{"agree", "disagree"};
  return kCats;
}

const std::vector<std::string>& quality_categories() {
  static const std::vector<std::string> kCats{"poor", "moderate", "good", "excellent"};
  return kCats;
}

void check_same_items(const std::map<std::string, std::string>& a,
                      const std::map<std::string, std::string>& b) {
  if (a.empty()) throw Error(ErrorCode::kItemMismatch, "no rated items");
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw Error(ErrorCode::kItemMismatch, "raters did not rate the same items");
  }
}

}  // namespace

void RatingsMatrix::validate() const {
  if (items.empty()) throw Error(ErrorCode::kDegenerateMatrix, "matrix has no items");
  if (categories.size() < 2) throw Error(ErrorCode::kDegenerateMatrix, "need >= 2 categories");
  if (raters_per_item < 2) throw Error(ErrorCode::kDegenerateMatrix, "need >= 2 raters per item");
  if (counts.size() != items.size()) throw Error(ErrorCode::kDegenerateMatrix, "row count mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].size() != categories.size()) {
      throw Error(ErrorCode::kDegenerateMatrix, "column count mismatch at " + items[i]);
    }
    if (std::accumulate(counts[i].begin(), counts[i].end(), std::size_t{0}) != raters_per_item) {
      throw Error(ErrorCode::kUnequalRaterCounts, items[i]);
    }
  }
}

RatingTarget RatingTarget::parse(std::string_view text) {
  if (text == "decision") return decision();
  constexpr std::string_view kPrefix = "explanation:";
  if (text.substr(0, kPrefix.size()) == kPrefix && text.size() > kPrefix.size()) {
    return explanation(std::string(text.substr(kPrefix.size())));
  }
  throw Error(ErrorCode::kInvalidConfig,
              "target must be 'decision' or 'explanation:<technique>', got '" + std::string(text) + "'");
}

std::string RatingTarget::to_string() const {
  return kind == Kind::kDecision ? "decision" : "explanation:" + technique_id;
}

RatingsMatrix build_matrix(std::span<const AnnotationRecord> annotations, const RatingTarget& target) {
  const bool decision = target.kind == RatingTarget::Kind::kDecision;
  RatingsMatrix m;
  m.categories = decision ? decision_categories() : quality_categories();

  std::map<std::string, std::vector<std::size_t>> rows;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& a : annotations) {
    if (!seen.insert({a.sample_id, a.evaluator_id}).second) {
      throw Error(ErrorCode::kDuplicateAnnotation, a.evaluator_id + " rated " + a.sample_id + " twice");
    }
    std::size_t column = 0;
    if (decision) {
      column = a.decision_judgment == Judgment::kAgree ? 0 : 1;
    } else {
      auto it = a.explanation_quality.find(target.technique_id);
      if (it == a.explanation_quality.end()) {
        rows.try_emplace(a.sample_id, m.categories.size(), 0);  // rated sample, missing rating
        continue;
      }
      column = static_cast<std::size_t>(it->second);
    }
    auto& row = rows.try_emplace(a.sample_id, m.categories.size(), 0).first->second;
    ++row[column];
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no annotations for " + target.to_string());

  std::size_t n = 0;
  for (const auto& [_, row] : rows) n = std::max(n, std::accumulate(row.begin(), row.end(), std::size_t{0}));
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "no ratings for " + target.to_string());
  for (auto& [item, row] : rows) {
    if (std::accumulate(row.begin(), row.end(), std::size_t{0}) != n) {
      throw Error(ErrorCode::kUnequalRaterCounts, item);
    }
    m.items.push_back(item);
    m.counts.push_back(std::move(row));
  }
  m.raters_per_item = n;
  return m;
}

AgreementScore fleiss_kappa(const RatingsMatrix& matrix) {
  matrix.validate();
  const Int n = static_cast<Int>(matrix.raters_per_item);
  const Int items = static_cast<Int>(matrix.items.size());

  AgreementScore s;
  Int agreeing = 0;  // sum over items of (sum_j n_ij^2 - n)
  std::vector<Int> totals(matrix.categories.size(), 0);
  for (const auto& row : matrix.counts) {
    Int sq = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const Int c = static_cast<Int>(row[j]);
      sq += c * c;
      totals[j] += c;
    }
    agreeing += sq - n;
    s.per_item_agreement.push_back(ratio(sq - n, n * (n - 1)));
  }
  // A_o = agreeing / (N n (n-1)); A_e = sum_j T_j^2 / (N n)^2.
  const __int128 ao_den = static_cast<__int128>(items) * n * (n - 1);
  __int128 ae_num = 0;
  for (Int t : totals) ae_num += static_cast<__int128>(t) * t;
  const __int128 ae_den = static_cast<__int128>(items * n) * (items * n);

  s.observed_agreement = ratio(agreeing, ao_den);
  s.expected_agreement = ratio(ae_num, ae_den);
  if (ae_num == ae_den) {
    if (static_cast<__int128>(agreeing) != ao_den) {
      throw Error(ErrorCode::kDegenerateMatrix, "A_e = 1 with A_o < 1");
    }
    s.kappa = 1.0;
    s.degenerate = true;
  } else {
    // (A_o - A_e) / (1 - A_e) = (a*d - c*b) / (b*(d - c))
    s.kappa = ratio(static_cast<__int128>(agreeing) * ae_den - ae_num * ao_den, ao_den * (ae_den - ae_num));
  }
  s.clamped_kappa = std::max(0.0, s.kappa);
  return s;
}

double percent_agreement(const RatingsMatrix& matrix) {
  matrix.validate();
  // Agreeing pairs out of C(n, 2) per item. C(n, 2) is the same for every
  // item, so the mean of the per-item shares is one integer ratio.
  const Int n = static_cast<Int>(matrix.raters_per_item);
  Int agreeing = 0;
  for (const auto& row : matrix.counts) {
    for (std::size_t c : row) agreeing += static_cast<Int>(c * (c > 0 ? c - 1 : 0) / 2);
  }
  return ratio(agreeing, static_cast<__int128>(matrix.items.size()) * (n * (n - 1) / 2));
}

double cohen_kappa(const std::map<std::string, std::string>& ratings_a,
                   const std::map<std::string, std::string>& ratings_b) {
  check_same_items(ratings_a, ratings_b);
  const Int n = static_cast<Int>(ratings_a.size());
  std::map<std::string, std::pair<Int, Int>> marginals;
  Int agree = 0;
  for (auto ia = ratings_a.begin(), ib = ratings_b.begin(); ia != ratings_a.end(); ++ia, ++ib) {
    if (ia->second == ib->second) ++agree;
    ++marginals[ia->second].first;
    ++marginals[ib->second].second;
  }
  Int chance = 0;  // N^2 * p_e
  for (const auto& [_, m] : marginals) chance += m.first * m.second;
  if (chance == n * n) return agree == n ? 1.0 : 0.0;
  return ratio(static_cast<__int128>(agree) * n - chance, static_cast<__int128>(n) * n - chance);
}

double scott_pi(const std::map<std::string, std::string>& ratings_a,
                const std::map<std::string, std::string>& ratings_b) {
  check_same_items(ratings_a, ratings_b);
  const Int n = static_cast<Int>(ratings_a.size());
  std::map<std::string, Int> pooled;
  Int agree = 0;
  for (auto ia = ratings_a.begin(), ib = ratings_b.begin(); ia != ratings_a.end(); ++ia, ++ib) {
    if (ia->second == ib->second) ++agree;
    ++pooled[ia->second];
    ++pooled[ib->second];
  }
  Int chance = 0;  // 4 N^2 * p_e
  for (const auto& [_, c] : pooled) chance += c * c;
  if (chance == 4 * n * n) return agree == n ? 1.0 : 0.0;
  return ratio(static_cast<__int128>(4) * n * agree - chance, static_cast<__int128>(4) * n * n - chance);
}

RatingsMatrix two_rater_matrix(const std::map<std::string, std::string>& ratings_a,
                               const std::map<std::string, std::string>& ratings_b) {
  check_same_items(ratings_a, ratings_b);
  RatingsMatrix m;
  std::set<std::string> cats;
  for (const auto& [_, c] : ratings_a) cats.insert(c);
  for (const auto& [_, c] : ratings_b) cats.insert(c);
  m.categories.assign(cats.begin(), cats.end());
  if (m.categories.size() < 2) m.categories.push_back(m.categories.front() + "'");
  m.raters_per_item = 2;
  for (auto ia = ratings_a.begin(), ib = ratings_b.begin(); ia != ratings_a.end(); ++ia, ++ib) {
    m.items.push_back(ia->first);
    std::vector<std::size_t> row(m.categories.size(), 0);
    for (const auto* c : {&ia->second, &ib->second}) {
      auto pos = std::lower_bound(m.categories.begin(), m.categories.end(), *c) - m.categories.begin();
      ++row[static_cast<std::size_t>(pos)];
    }
    m.counts.push_back(std::move(row));
  }
  return m;
}

Json to_json(const AgreementScore& score) {
  return {{"kappa", score.kappa},
          {"observed_agreement", score.observed_agreement},
          {"expected_agreement", score.expected_agreement},
          {"clamped_kappa", score.clamped_kappa},
          {"per_item_agreement", score.per_item_agreement},
          {"degenerate", score.degenerate}};
}

}  // namespace veridical
