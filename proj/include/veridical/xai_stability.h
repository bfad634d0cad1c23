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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace veridical {

std::string to_lower(std::string_view s);

// Lowercased word -> synonyms, closed under symmetry at construction.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;
  explicit SynonymLexicon(const std::map<std::string, std::vector<std::string>>& entries);

  // Lexicon file: JSON object mapping word -> array of synonyms.
  static SynonymLexicon from_json(const Json& j);
  static SynonymLexicon load(const std::filesystem::path& path);
  Json to_json() const;

  // Empty set for uncovered words. Lookup is case-insensitive.
  const std::set<std::string>& synonyms(std::string_view word) const;
  bool covers(std::string_view word) const { return !synonyms(word).empty(); }
  bool empty() const { return table_.empty(); }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::set<std::string>, std::less<>> table_;
};

struct PerturbationResult {
  std::string text;
  std::size_t covered_words = 0;
  std::size_t substituted = 0;
  // No lexicon-covered words: `text` is the input unchanged.
  bool no_covered_words = false;
};

// Replaces ceil(rate * k) of the k covered words with a seeded synonym
// choice; every other byte is left alone. Errors: kRejectedPrecondition on
// empty text, kInvalidConfig for rate outside (0, 1].
PerturbationResult perturb_instance(std::string_view text, const SynonymLexicon& lexicon, double rate,
                                    std::uint64_t seed);

// Scales scores into [-1, 1] by the largest magnitude; all-zero input is
// returned unchanged.
std::vector<WordScore> normalize_max_abs(std::span<const WordScore> scores);

// |orig - pert * phi| where phi = 1 iff the word or a synonym occurs in the
// perturbed side (case-insensitive). Among several matches the closest
// score is used; an absent word shifts by |orig|.
double word_shift(std::string_view word, double original_score,
                  std::span<const WordScore> perturbed_scores, const SynonymLexicon& lexicon);

// Mean word shift over every word of the original instance, after max-abs
// normalization of both sides. Errors: kEmptySaliency.
double instance_stability(const SaliencyRecord& record, const SynonymLexicon& lexicon);

// 1 - min(1, mean_instability / 2): normalized shifts live in [0, 2].
double stability_similarity(double mean_instability);

// beta1 * similarity + beta2 * clamped kappa per technique.
// Errors: kBadWeights, kMissingMetric (technique without a kappa).
std::map<std::string, double> combined_score(const std::map<std::string, double>& stability_means,
                                             const std::map<std::string, double>& kappas,
                                             double beta1, double beta2);

struct StabilityReport {
  std::map<std::pair<std::string, std::string>, double> per_instance;  // (instance, technique)
  std::map<std::string, double> mean_instability;
  std::map<std::string, double> per_technique_similarity;
  std::map<std::string, double> kappas;  // clamped
  std::map<std::string, double> combined;
  double beta1 = 0.5;
  double beta2 = 0.5;
};

// Scores every record (optionally only instances in `sample_ids`) and
// combines with the supplied per-technique clamped kappas.
StabilityReport build_stability_report(std::span<const SaliencyRecord> records,
                                       const SynonymLexicon& lexicon,
                                       const std::map<std::string, double>& kappas, double beta1 = 0.5,
                                       double beta2 = 0.5, const std::set<std::string>& sample_ids = {});

// Descending E_g, then higher kappa, then technique id.
std::vector<std::string> rank_techniques(const StabilityReport& report);

Json to_json(const StabilityReport& report);

}  // namespace veridical
