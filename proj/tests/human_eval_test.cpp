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

#include "test_util.h"

#include <gtest/gtest.h>

#include <random>

namespace veridical {
namespace {

// Brute force from the definitions: expand each row into individual rater
// assignments, count agreeing rater pairs, pool category proportions.
struct Oracle {
  double observed;
  double expected;
  double kappa;
};

Oracle brute_force_fleiss(const RatingsMatrix& m) {
  double agree_sum = 0.0;
  std::vector<double> pooled(m.categories.size(), 0.0);
  double total = 0.0;
  for (const auto& row : m.counts) {
    std::vector<std::size_t> raters;
    for (std::size_t j = 0; j < row.size(); ++j) {
      for (std::size_t k = 0; k < row[j]; ++k) raters.push_back(j);
      pooled[j] += static_cast<double>(row[j]);
      total += static_cast<double>(row[j]);
    }
    double agree = 0.0, pairs = 0.0;
    for (std::size_t a = 0; a < raters.size(); ++a) {
      for (std::size_t b = 0; b < raters.size(); ++b) {
        if (a == b) continue;
        pairs += 1.0;
        if (raters[a] == raters[b]) agree += 1.0;
      }
    }
    agree_sum += agree / pairs;
  }
  double ao = agree_sum / static_cast<double>(m.counts.size());
  double ae = 0.0;
  for (double p : pooled) ae += (p / total) * (p / total);
  return {ao, ae, ae < 1.0 ? (ao - ae) / (1.0 - ae) : 1.0};
}

RatingsMatrix random_matrix(std::mt19937_64& rng) {
  RatingsMatrix m;
  std::size_t cats = 2 + rng() % 4;
  std::size_t n = 2 + rng() % 5;
  std::size_t items = 1 + rng() % 30;
  for (std::size_t j = 0; j < cats; ++j) m.categories.push_back("c" + std::to_string(j));
  m.raters_per_item = n;
  // Skewed category preference so agreement varies across matrices.
  std::discrete_distribution<std::size_t> pick({5.0, 1.0 + static_cast<double>(rng() % 5), 1.0, 0.5, 0.2});
  for (std::size_t i = 0; i < items; ++i) {
    m.items.push_back("item" + std::to_string(i));
    std::vector<std::size_t> row(cats, 0);
    for (std::size_t r = 0; r < n; ++r) ++row[pick(rng) % cats];
    m.counts.push_back(row);
  }
  return m;
}

std::vector<AnnotationRecord> annotate(const std::vector<std::vector<Judgment>>& by_item) {
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 0; i < by_item.size(); ++i) {
    for (std::size_t r = 0; r < by_item[i].size(); ++r) {
      out.push_back({"s" + std::to_string(i), "E" + std::to_string(r), by_item[i][r],
                     {{"SHAP", static_cast<Quality>((i + r) % 4)}}, Timestamp{0}, std::nullopt});
    }
  }
  return out;
}

TEST(FleissKappa, UnanimousIsOne) {
  RatingsMatrix m{{"a", "b", "c"}, {"x", "y", "z"}, {{3, 0, 0}, {0, 3, 0}, {0, 0, 3}}, 3};
  auto s = fleiss_kappa(m);
  EXPECT_EQ(s.kappa, 1.0);
  EXPECT_EQ(s.observed_agreement, 1.0);
  EXPECT_FALSE(s.degenerate);
  RatingsMatrix single{{"a", "b"}, {"x", "y"}, {{4, 0}, {4, 0}}, 4};
  auto d = fleiss_kappa(single);
  EXPECT_EQ(d.kappa, 1.0);
  EXPECT_TRUE(d.degenerate);
}

TEST(FleissKappa, TwoOneSplitExample) {
  RatingsMatrix m{{"a", "b", "c", "d"}, {"x", "y"}, {{2, 1}, {2, 1}, {2, 1}, {2, 1}}, 3};
  auto s = fleiss_kappa(m);
  EXPECT_DOUBLE_EQ(s.observed_agreement, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.expected_agreement, 5.0 / 9.0);
  EXPECT_EQ(s.kappa, -0.5);
  EXPECT_EQ(s.clamped_kappa, 0.0);
}

TEST(FleissKappa, MatchesBruteForceOn100RandomMatrices) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 100; ++t) {
    auto m = random_matrix(rng);
    auto s = fleiss_kappa(m);
    auto o = brute_force_fleiss(m);
    EXPECT_NEAR(s.observed_agreement, o.observed, 1e-9);
    EXPECT_NEAR(s.expected_agreement, o.expected, 1e-9);
    EXPECT_NEAR(s.kappa, o.kappa, 1e-9);
    EXPECT_NEAR(percent_agreement(m), s.observed_agreement, 1e-12);
  }
}

TEST(FleissKappa, InvariantUnderItemAndCategoryPermutation) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    auto m = random_matrix(rng);
    auto base = fleiss_kappa(m);
    RatingsMatrix p = m;
    std::reverse(p.items.begin(), p.items.end());
    std::reverse(p.counts.begin(), p.counts.end());
    std::reverse(p.categories.begin(), p.categories.end());
    for (auto& row : p.counts) std::reverse(row.begin(), row.end());
    auto permuted = fleiss_kappa(p);
    EXPECT_EQ(permuted.kappa, base.kappa);
    EXPECT_EQ(percent_agreement(p), percent_agreement(m));
  }
}

TEST(PercentAgreement, Examples) {
  RatingsMatrix unanimous{{"a"}, {"x", "y"}, {{3, 0}}, 3};
  EXPECT_EQ(percent_agreement(unanimous), 1.0);
  RatingsMatrix split{{"a"}, {"x", "y"}, {{2, 1}}, 3};
  EXPECT_DOUBLE_EQ(percent_agreement(split), 1.0 / 3.0);
}

TEST(CohenKappa, Examples) {
  std::map<std::string, std::string> a{{"1", "agree"}, {"2", "agree"}, {"3", "agree"}, {"4", "agree"}};
  std::map<std::string, std::string> b{{"1", "agree"}, {"2", "disagree"}, {"3", "agree"}, {"4", "disagree"}};
  EXPECT_EQ(cohen_kappa(a, a), 1.0);
  EXPECT_EQ(cohen_kappa(a, b), 0.0);
  EXPECT_EQ(scott_pi(b, b), 1.0);
  EXPECT_DOUBLE_EQ(scott_pi(a, b), -1.0 / 3.0);
  auto c = a;
  c.erase("4");
  EXPECT_ERROR_CODE(cohen_kappa(a, c), ErrorCode::kItemMismatch);
  EXPECT_ERROR_CODE(scott_pi(a, c), ErrorCode::kItemMismatch);
}

TEST(CohenKappa, MatchesBruteForceAndScottEqualsTwoRaterFleiss) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> cats{"poor", "moderate", "good", "excellent"};
  for (int t = 0; t < 100; ++t) {
    std::map<std::string, std::string> a, b;
    for (int i = 0; i < 50; ++i) {
      std::string ca = cats[rng() % 4];
      a["i" + std::to_string(i)] = ca;
      b["i" + std::to_string(i)] = rng() % 3 == 0 ? cats[rng() % 4] : ca;
    }
    // Oracle: floating-point textbook definitions.
    double po = 0;
    std::map<std::string, double> ma, mb;
    for (auto& [k, v] : a) {
      po += v == b[k];
      ma[v] += 1;
      mb[b[k]] += 1;
    }
    po /= 50.0;
    double pe_cohen = 0, pe_scott = 0;
    for (const auto& c : cats) {
      pe_cohen += (ma[c] / 50) * (mb[c] / 50);
      double pooled = (ma[c] + mb[c]) / 100;
      pe_scott += pooled * pooled;
    }
    EXPECT_NEAR(cohen_kappa(a, b), (po - pe_cohen) / (1 - pe_cohen), 1e-9);
    EXPECT_NEAR(scott_pi(a, b), (po - pe_scott) / (1 - pe_scott), 1e-9);
    EXPECT_NEAR(fleiss_kappa(two_rater_matrix(a, b)).kappa, scott_pi(a, b), 1e-9);
  }
}

TEST(BuildMatrix, ThreeRatersSeventySamples) {
  std::vector<std::vector<Judgment>> judgments(70, {Judgment::kAgree, Judgment::kAgree, Judgment::kDisagree});
  auto anns = annotate(judgments);
  auto m = build_matrix(anns, RatingTarget::decision());
  EXPECT_EQ(m.items.size(), 70u);
  EXPECT_EQ(m.raters_per_item, 3u);
  EXPECT_EQ(m.counts[0], (std::vector<std::size_t>{2, 1}));
}

TEST(BuildMatrix, TabulationMatchesHandCounts) {
  auto anns = annotate({{Judgment::kAgree, Judgment::kDisagree},
                        {Judgment::kDisagree, Judgment::kDisagree},
                        {Judgment::kAgree, Judgment::kAgree}});
  auto m = build_matrix(anns, RatingTarget::decision());
  EXPECT_EQ(m.items, (std::vector<std::string>{"s0", "s1", "s2"}));
  EXPECT_EQ(m.counts, (std::vector<std::vector<std::size_t>>{{1, 1}, {0, 2}, {2, 0}}));
  // Quality rating is (item + rater) % 4: s0 -> poor, moderate; s1 -> moderate, good; ...
  auto e = build_matrix(anns, RatingTarget::explanation("SHAP"));
  EXPECT_EQ(e.categories.size(), 4u);
  EXPECT_EQ(e.counts, (std::vector<std::vector<std::size_t>>{{1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}}));
}

TEST(BuildMatrix, MissingRaterRejected) {
  auto anns = annotate({{Judgment::kAgree, Judgment::kAgree, Judgment::kAgree},
                        {Judgment::kAgree, Judgment::kAgree}});
  try {
    build_matrix(anns, RatingTarget::decision());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnequalRaterCounts);
    EXPECT_EQ(e.detail(), "s1");
  }
  EXPECT_ERROR_CODE(build_matrix(anns, RatingTarget::explanation("LIME")), ErrorCode::kEmptyInput);
}

TEST(RatingTarget, Parse) {
  EXPECT_EQ(RatingTarget::parse("decision").kind, RatingTarget::Kind::kDecision);
  auto t = RatingTarget::parse("explanation:SHAP");
  EXPECT_EQ(t.technique_id, "SHAP");
  EXPECT_EQ(t.to_string(), "explanation:SHAP");
  EXPECT_ERROR_CODE(RatingTarget::parse("explanation:"), ErrorCode::kInvalidConfig);
}

}  // namespace
}  // namespace veridical
