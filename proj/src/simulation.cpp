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

#include "veridical/simulation.h"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

namespace veridical {

SynonymLexicon financial_lexicon() {
  return SynonymLexicon(std::map<std::string, std::vector<std::string>>{
      {"assets", {"holdings", "resources"}},
      {"liabilities", {"obligations", "debts"}},
      {"cash", {"funds"}},
      {"total", {"aggregate", "overall"}},
      {"inventory", {"stock"}},
      {"expenses", {"costs"}},
      {"deposits", {"advances"}},
      {"significant", {"considerable", "substantial"}},
      {"value", {"worth"}},
      {"equipment", {"machinery"}},
      {"property", {"premises"}},
      {"confirming", {"verifying"}},
      {"integrity", {"consistency"}},
      {"include", {"comprise"}},
      {"noted", {"recorded"}},
      {"accumulate", {"amount"}},
      {"receivable", {"due"}},
      {"payable", {"owed"}},
  });
}

std::vector<TechniqueProfile> default_technique_profiles() {
  return {{"IG", 0.30, 0.62}, {"LIME", 0.18, 0.74}, {"SHAP", 0.07, 0.88}};
}

namespace {

std::vector<std::string> distinct_words(const std::string& text) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string cur;
  auto push = [&] {
    if (cur.size() >= 3 && seen.insert(to_lower(cur)).second) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    } else {
      push();
    }
  }
  push();
  return out;
}

std::string match_case(const std::string& like, std::string word) {
  if (!like.empty() && std::isupper(static_cast<unsigned char>(like[0]))) {
    word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  }
  return word;
}

std::uint64_t mix(std::uint64_t seed, std::string_view s, std::uint64_t salt = 0) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL ^ (salt * 0xbf58476d1ce4e5b9ULL);
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace

std::vector<SaliencyRecord> generate_saliency(std::span<const DecisionTrace> traces, const SynonymLexicon& lexicon,
                                              std::span<const TechniqueProfile> techniques, std::uint64_t seed,
                                              std::size_t words_per_instance) {
  std::vector<SaliencyRecord> out;
  for (const auto& t : traces) {
    std::mt19937_64 base_rng(mix(seed, t.instance_id));
    auto words = distinct_words(t.prompt_text);
    std::shuffle(words.begin(), words.end(), base_rng);
    if (words.size() > words_per_instance) words.resize(words_per_instance);
    if (words.empty()) words.push_back("statement");
    // Shared "true" importance; techniques differ only in noise.
    std::normal_distribution<double> importance(0.0, 0.5);
    std::vector<double> base;
    for (std::size_t i = 0; i < words.size(); ++i) base.push_back(importance(base_rng));
    std::vector<std::string> swapped = words;
    std::bernoulli_distribution swap(0.4);
    for (auto& w : swapped) {
      const auto& syns = lexicon.synonyms(w);
      if (syns.empty() || !swap(base_rng)) continue;
      auto it = syns.begin();
      std::advance(it, static_cast<long>(base_rng() % syns.size()));
      w = match_case(w, *it);
    }

    for (const auto& tech : techniques) {
      std::mt19937_64 rng(mix(seed, t.instance_id, std::hash<std::string>{}(tech.id)));
      std::normal_distribution<double> noise(0.0, tech.attribution_noise);
      SaliencyRecord r;
      r.instance_id = t.instance_id;
      r.technique_id = tech.id;
      r.perturbed_instance_id = t.instance_id + "-p";
      for (std::size_t i = 0; i < words.size(); ++i) {
        r.original_scores.push_back({words[i], round_decimal(base[i] + noise(rng))});
        r.perturbed_scores.push_back({swapped[i], round_decimal(base[i] + noise(rng))});
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<AnnotationRecord> simulate_annotations(std::span<const DecisionTrace> samples,
                                                   const AnnotationSimulation& sim) {
  static constexpr Quality kLevels[] = {Quality::kPoor, Quality::kModerate, Quality::kGood, Quality::kExcellent};
  std::vector<AnnotationRecord> out;
  std::int64_t tick = 0;
  for (const auto& s : samples) {
    std::mt19937_64 rng(mix(sim.seed, s.instance_id));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double confidence = 0.0;
    for (const auto& [label, p] : s.decision_probs) confidence = std::max(confidence, p);
    // Confident predictions are more often right.
    const bool latent_agree = unit(rng) < 0.35 + 0.6 * confidence;
    std::vector<int> latent_quality;
    for (const auto& tech : sim.techniques) {
      const double q = tech.rater_consistency * 3.0 + (unit(rng) - 0.5) * 1.6;
      latent_quality.push_back(std::clamp(static_cast<int>(q + 0.5), 0, 3));
    }
    for (const auto& evaluator : sim.evaluators) {
      AnnotationRecord a;
      a.sample_id = s.instance_id;
      a.evaluator_id = evaluator;
      const bool agree = unit(rng) < sim.decision_consistency ? latent_agree : !latent_agree;
      a.decision_judgment = agree ? Judgment::kAgree : Judgment::kDisagree;
      for (std::size_t k = 0; k < sim.techniques.size(); ++k) {
        int q = latent_quality[k];
        if (unit(rng) >= sim.techniques[k].rater_consistency) q = static_cast<int>(rng() % 4);
        a.explanation_quality[sim.techniques[k].id] = kLevels[q];
      }
      a.timestamp = Timestamp{sim.start.unix_ms + 1000 * tick++};
      a.iteration = sim.iteration;
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<GroundTruthLabel> simulate_labels(std::span<const DecisionTrace> traces, std::uint64_t seed) {
  std::vector<GroundTruthLabel> out;
  out.reserve(traces.size());
  for (const auto& t : traces) {
    std::mt19937_64 rng(mix(seed ^ 0x9e3779b97f4a7c15ULL, t.instance_id));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Calibrated: the prediction is right with its own probability.
    std::string truth = t.predicted_class;
    if (unit(rng) >= t.decision_probs.at(t.predicted_class)) {
      std::vector<std::string> others;
      for (const auto& [label, _] : t.decision_probs) {
        if (label != t.predicted_class) others.push_back(label);
      }
      truth = others[rng() % others.size()];
    }
    out.push_back({t.instance_id, truth});
  }
  return out;
}

}  // namespace veridical
