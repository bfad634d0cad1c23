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

#include "veridical/xai_stability.h"

#include "test_util.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace veridical {
namespace {

using Entries = std::map<std::string, std::vector<std::string>>;

SynonymLexicon finance_lexicon() {
  return SynonymLexicon(Entries{{"liabilities", {"obligations"}},
                         {"assets", {"holdings", "resources"}},
                         {"cash", {"funds"}},
                         {"total", {"aggregate"}}});
}

// Straight word loop over the definitions, independent of the lookup table
// the implementation builds.
double oracle_stability(const SaliencyRecord& r, const SynonymLexicon& lex) {
  auto norm = [](const std::vector<WordScore>& v) {
    double m = 0;
    for (const auto& w : v) m = std::max(m, std::abs(w.score));
    std::vector<WordScore> out = v;
    if (m > 0) for (auto& w : out) w.score /= m;
    return out;
  };
  auto orig = norm(r.original_scores);
  auto pert = norm(r.perturbed_scores);
  double total = 0;
  for (const auto& w : orig) {
    std::vector<double> candidates;
    for (const auto& p : pert) {
      std::string a = to_lower(w.word), b = to_lower(p.word);
      if (a == b || lex.synonyms(a).contains(b)) candidates.push_back(std::abs(w.score - p.score));
    }
    total += candidates.empty() ? std::abs(w.score) : *std::min_element(candidates.begin(), candidates.end());
  }
  return total / static_cast<double>(orig.size());
}

SaliencyRecord random_record(std::mt19937_64& rng) {
  static const std::vector<std::string> vocab{"total", "liabilities", "obligations", "assets", "holdings",
                                              "cash", "funds", "inventory", "equity", "Total", "CASH"};
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  SaliencyRecord r{"i", "SHAP", {}, "i'", {}};
  std::size_t n = 1 + rng() % 12;
  for (std::size_t i = 0; i < n; ++i) r.original_scores.push_back({vocab[rng() % vocab.size()], score(rng)});
  std::size_t m = 1 + rng() % 12;
  for (std::size_t i = 0; i < m; ++i) r.perturbed_scores.push_back({vocab[rng() % vocab.size()], score(rng)});
  return r;
}

TEST(Lexicon, SymmetricClosureAndCaseFolding) {
  auto lex = finance_lexicon();
  EXPECT_TRUE(lex.synonyms("obligations").contains("liabilities"));
  EXPECT_TRUE(lex.synonyms("Holdings").contains("assets"));
  EXPECT_FALSE(lex.synonyms("holdings").contains("resources"));
  EXPECT_TRUE(lex.synonyms("inventory").empty());
  auto j = SynonymLexicon::from_json(Json::parse(R"({"Debt":["Borrowing"]})"));
  EXPECT_TRUE(j.synonyms("borrowing").contains("debt"));
}

TEST(Perturb, ForcedSingleSubstitution) {
  SynonymLexicon lex(Entries{{"liabilities", {"obligations"}}});
  auto r = perturb_instance("total liabilities", lex, 1.0, 1);
  EXPECT_EQ(r.text, "total obligations");
  EXPECT_EQ(r.substituted, 1u);
  EXPECT_FALSE(r.no_covered_words);
}

TEST(Perturb, EmptyLexiconWarns) {
  auto r = perturb_instance("total liabilities", SynonymLexicon{}, 0.5, 1);
  EXPECT_EQ(r.text, "total liabilities");
  EXPECT_TRUE(r.no_covered_words);
  EXPECT_ERROR_CODE(perturb_instance("", SynonymLexicon{}, 0.5, 1), ErrorCode::kRejectedPrecondition);
  EXPECT_ERROR_CODE(perturb_instance("x", SynonymLexicon{}, 0.0, 1), ErrorCode::kInvalidConfig);
}

TEST(Perturb, DeterministicAndCountsCovered) {
  const std::string s =
      "Total assets accumulate to $271,498. Total liabilities are $185,000, cash of $11,552 and "
      "other assets and liabilities.";
  auto lex = finance_lexicon();
  auto a = perturb_instance(s, lex, 0.3, 42);
  auto b = perturb_instance(s, lex, 0.3, 42);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.covered_words, 7u);
  EXPECT_EQ(a.substituted, 3u);  // ceil(0.3 * 7)
  EXPECT_NE(a.text, s);
  // Non-word bytes survive untouched.
  EXPECT_NE(a.text.find("$271,498."), std::string::npos);
}

TEST(WordShift, Examples) {
  auto lex = finance_lexicon();
  std::vector<WordScore> same{{"cash", 0.8}};
  EXPECT_EQ(word_shift("cash", 0.8, same, lex), 0.0);
  std::vector<WordScore> absent{{"inventory", 0.4}};
  EXPECT_EQ(word_shift("cash", 0.8, absent, lex), 0.8);
  std::vector<WordScore> synonym{{"funds", 0.5}};
  EXPECT_NEAR(word_shift("cash", 0.8, synonym, lex), 0.3, 1e-15);
  std::vector<WordScore> flipped{{"funds", -0.5}};
  EXPECT_NEAR(word_shift("cash", 0.8, flipped, lex), 1.3, 1e-15);
  std::vector<WordScore> repeated{{"funds", 0.2}, {"cash", -0.6}, {"funds", 0.5}};
  EXPECT_NEAR(word_shift("cash", 0.8, repeated, lex), 0.3, 1e-15);
}

TEST(InstanceStability, Examples) {
  auto lex = finance_lexicon();
  SaliencyRecord same{"i", "SHAP", {{"cash", 0.5}, {"equity", -1.0}}, "i'", {{"cash", 0.5}, {"equity", -1.0}}};
  EXPECT_EQ(instance_stability(same, lex), 0.0);
  // Shifts 0.3 and 0.1 after normalization (max |score| is 1 on both sides).
  SaliencyRecord two{"i", "SHAP", {{"cash", 1.0}, {"equity", 0.5}}, "i'", {{"funds", 0.7}, {"equity", 0.4}, {"x", 1.0}}};
  EXPECT_NEAR(instance_stability(two, lex), 0.2, 1e-15);
  SaliencyRecord empty{"i", "SHAP", {}, "i'", {{"a", 1.0}}};
  EXPECT_ERROR_CODE(instance_stability(empty, lex), ErrorCode::kEmptySaliency);
}

TEST(InstanceStability, MatchesWordLoopOracle) {
  auto lex = finance_lexicon();
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    auto r = random_record(rng);
    EXPECT_NEAR(instance_stability(r, lex), oracle_stability(r, lex), 1e-12);
  }
}

TEST(InstanceStability, ZeroIffUnchangedAndPresent) {
  auto lex = finance_lexicon();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    auto r = random_record(rng);
    r.perturbed_scores = r.original_scores;
    EXPECT_EQ(instance_stability(r, lex), 0.0);
    r.perturbed_scores.pop_back();
    if (r.perturbed_scores.empty()) continue;
    bool still_identical = true;
    for (const auto& w : r.original_scores) {
      still_identical &= std::any_of(r.perturbed_scores.begin(), r.perturbed_scores.end(),
                                     [&](const WordScore& p) { return p == w; });
    }
    if (!still_identical) EXPECT_GT(instance_stability(r, lex), 0.0);
  }
}

TEST(InstanceStability, PositiveScalingInvariance) {
  auto lex = finance_lexicon();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int t = 0; t < 500; ++t) {
    auto r = random_record(rng);
    const double base = instance_stability(r, lex);
    // Power-of-two scales are exact in binary floating point, so the
    // normalized scores and the result must be bit-identical.
    auto exact = r;
    const double pow2 = std::ldexp(1.0, static_cast<int>(rng() % 40) - 20);
    for (auto& w : exact.original_scores) w.score *= pow2;
    for (auto& w : exact.perturbed_scores) w.score *= pow2 * 2;
    EXPECT_EQ(instance_stability(exact, lex), base);
    auto scaled = r;
    const double c = scale(rng);
    for (auto& w : scaled.original_scores) w.score *= c;
    EXPECT_NEAR(instance_stability(scaled, lex), base, 1e-12);
  }
}

TEST(CombinedScore, Examples) {
  EXPECT_EQ(combined_score({{"g", 0.0}}, {{"g", 1.0}}, 0.5, 0.5).at("g"), 1.0);
  EXPECT_EQ(combined_score({{"g", 2.0}}, {{"g", 0.0}}, 0.5, 0.5).at("g"), 0.0);
  EXPECT_NEAR(combined_score({{"g", 0.4}}, {{"g", 0.8}}, 0.5, 0.5).at("g"), 0.8, 1e-12);
  EXPECT_ERROR_CODE(combined_score({{"g", 0.4}}, {{"g", 0.8}}, 0.6, 0.6), ErrorCode::kBadWeights);
  EXPECT_ERROR_CODE(combined_score({{"g", 0.4}}, {}, 0.5, 0.5), ErrorCode::kMissingMetric);
}

TEST(CombinedScore, MonotoneInInstabilityAndKappa) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> eps(0.0, 2.5);
  std::uniform_real_distribution<double> kap(-0.5, 1.0);
  std::uniform_real_distribution<double> beta(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    double b1 = beta(rng);
    double e1 = eps(rng), e2 = eps(rng), k1 = kap(rng), k2 = kap(rng);
    if (e1 > e2) std::swap(e1, e2);
    if (k1 < k2) std::swap(k1, k2);
    double better = combined_score({{"g", e1}}, {{"g", k1}}, b1, 1 - b1).at("g");
    double worse = combined_score({{"g", e2}}, {{"g", k2}}, b1, 1 - b1).at("g");
    EXPECT_GE(better, worse);
    EXPECT_GE(worse, 0.0);
    EXPECT_LE(better, 1.0);
  }
}

TEST(RankTechniques, Ordering) {
  StabilityReport r;
  r.combined = {{"only", 0.4}};
  r.kappas = {{"only", 0.1}};
  EXPECT_EQ(rank_techniques(r), std::vector<std::string>{"only"});
  r.combined = {{"a", 0.8}, {"b", 0.6}, {"c", 0.9}};
  r.kappas = {{"a", 0.1}, {"b", 0.1}, {"c", 0.1}};
  EXPECT_EQ(rank_techniques(r), (std::vector<std::string>{"c", "a", "b"}));
  r.combined = {{"lime", 0.7}, {"shap", 0.7}};
  r.kappas = {{"lime", 0.7}, {"shap", 0.9}};
  EXPECT_EQ(rank_techniques(r), (std::vector<std::string>{"shap", "lime"}));
}

TEST(StabilityReport, IdenticalPairsWithUnanimousKappaGiveOne) {
  std::vector<SaliencyRecord> recs{{"a", "SHAP", {{"cash", 0.3}}, "a'", {{"cash", 0.3}}},
                                   {"b", "SHAP", {{"equity", -0.9}, {"cash", 0.1}}, "b'", {{"equity", -0.9}, {"cash", 0.1}}}};
  auto report = build_stability_report(recs, finance_lexicon(), {{"SHAP", 1.0}});
  EXPECT_EQ(report.per_instance.at({"a", "SHAP"}), 0.0);
  EXPECT_EQ(report.combined.at("SHAP"), 1.0);
}

}  // namespace
}  // namespace veridical
