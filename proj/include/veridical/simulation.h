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
#include "veridical/xai_stability.h"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace veridical {

// Balance-sheet vocabulary with common synonym pairs.
SynonymLexicon financial_lexicon();

// How a simulated XAI technique behaves: attribution noise drives the
// saliency shift under perturbation, rater consistency drives how often
// evaluators agree on its explanation quality.
struct TechniqueProfile {
  std::string id;
  double attribution_noise = 0.1;
  double rater_consistency = 0.8;
};

// SHAP steadier than LIME, LIME steadier than integrated gradients.
std::vector<TechniqueProfile> default_technique_profiles();

// One record per (trace, technique). Perturbed lists swap some covered words
// for synonyms and redraw technique noise.
std::vector<SaliencyRecord> generate_saliency(std::span<const DecisionTrace> traces, const SynonymLexicon& lexicon,
                                              std::span<const TechniqueProfile> techniques, std::uint64_t seed,
                                              std::size_t words_per_instance = 12);

struct AnnotationSimulation {
  std::vector<std::string> evaluators{"E1", "E2", "E3"};
  std::vector<TechniqueProfile> techniques = default_technique_profiles();
  // Probability an evaluator reports the sample's latent decision judgment.
  double decision_consistency = 0.92;
  std::uint64_t seed = 0;
  Timestamp start = Timestamp::parse("2026-01-15T09:00:00.000Z");
  std::optional<int> iteration;
};

// Every evaluator rates every sample (Fleiss needs a fixed rater count).
std::vector<AnnotationRecord> simulate_annotations(std::span<const DecisionTrace> samples,
                                                   const AnnotationSimulation& sim);

// Ground truth drawn so each prediction is right with the probability the
// model gave it.
std::vector<GroundTruthLabel> simulate_labels(std::span<const DecisionTrace> traces, std::uint64_t seed);

}  // namespace veridical
