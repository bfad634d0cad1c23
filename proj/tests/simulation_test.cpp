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
#include "veridical/uncertainty.h"

#include "veridical/human_eval.h"

#include "test_util.h"

#include <gtest/gtest.h>

namespace veridical {
namespace {

TEST(Simulation, SaliencyIsDeterministicAndValid) {
  const auto traces = generate_fixtures(4, 30);
  const auto profiles = default_technique_profiles();
  const auto lex = financial_lexicon();
  auto a = generate_saliency(traces, lex, profiles, 1);
  auto b = generate_saliency(traces, lex, profiles, 1);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 90u);
  for (const auto& r : a) {
    EXPECT_NO_THROW(validate(r));
    EXPECT_EQ(r.original_scores.size(), r.perturbed_scores.size());
  }
}

TEST(Simulation, TechniqueNoiseOrdersStability) {
  const auto traces = generate_fixtures(4, 200);
  const auto lex = financial_lexicon();
  auto recs = generate_saliency(traces, lex, default_technique_profiles(), 2);
  auto report = build_stability_report(recs, lex, {{"IG", 0.5}, {"LIME", 0.5}, {"SHAP", 0.5}});
  EXPECT_LT(report.mean_instability.at("SHAP"), report.mean_instability.at("LIME"));
  EXPECT_LT(report.mean_instability.at("LIME"), report.mean_instability.at("IG"));
}

TEST(Simulation, AnnotationsAreAllRateAllAndFavourShap) {
  const auto traces = generate_fixtures(4, 70);
  AnnotationSimulation sim;
  sim.seed = 3;
  sim.iteration = 2;
  auto ann = simulate_annotations(traces, sim);
  ASSERT_EQ(ann.size(), 210u);
  EXPECT_EQ(ann, simulate_annotations(traces, sim));
  EXPECT_EQ(ann[0].iteration, 2);
  const auto decision = fleiss_kappa(build_matrix(ann, RatingTarget::decision()));
  EXPECT_GT(decision.kappa, 0.3);
  const double shap = fleiss_kappa(build_matrix(ann, RatingTarget::explanation("SHAP"))).kappa;
  const double ig = fleiss_kappa(build_matrix(ann, RatingTarget::explanation("IG"))).kappa;
  EXPECT_GT(shap, ig);
}

TEST(Simulation, LabelsTrackModelConfidence) {
  const auto traces = generate_fixtures(6, 2000);
  const auto labels = simulate_labels(traces, 1);
  ASSERT_EQ(labels.size(), traces.size());
  EXPECT_EQ(labels, simulate_labels(traces, 1));
  double expected_hits = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    EXPECT_EQ(labels[i].instance_id, traces[i].instance_id);
    EXPECT_TRUE(traces[i].decision_probs.contains(labels[i].true_class));
    expected_hits += traces[i].decision_probs.at(traces[i].predicted_class);
    hits += labels[i].true_class == traces[i].predicted_class;
  }
  // Binomial sum of 2000 draws: 5 sd is about 100.
  EXPECT_NEAR(static_cast<double>(hits), expected_hits, 100.0);
  const auto q = quality_report(traces, labels, "fund");
  EXPECT_GT(q.f1, 0.5);
}

}  // namespace
}  // namespace veridical
