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

#include "veridical/pipeline.h"

#include "veridical/simulation.h"
#include "test_util.h"

namespace veridical {
namespace {

struct Run {
  std::vector<DecisionTrace> traces;
  std::vector<InstanceScore> scores;
  std::vector<SaliencyRecord> saliency;
  std::vector<AnnotationRecord> annotations;
};

Run make_run(std::size_t n, std::size_t judged) {
  Run r;
  r.traces = generate_fixtures(17, n);
  r.scores = score_traces(r.traces);
  const auto profiles = default_technique_profiles();
  r.saliency = generate_saliency(r.traces, financial_lexicon(), profiles, 3);
  AnnotationSimulation sim;
  sim.seed = 8;
  r.annotations = simulate_annotations(std::span(r.traces).first(judged), sim);
  return r;
}

TEST(GateSnapshot, ComposesTheModuleResults) {
  const auto r = make_run(100, 30);
  const GateThresholds th;
  const auto s = compute_gate_snapshot(r.scores, r.annotations, r.saliency, financial_lexicon(), th, 0.5, 0.5, 3);
  ASSERT_TRUE(s.dataset);
  EXPECT_EQ(*s.metrics.dataset_entropy, dataset_scores(r.scores).entropy);
  EXPECT_EQ(*s.metrics.kappa_y, fleiss_kappa(build_matrix(r.annotations, RatingTarget::decision())).clamped_kappa);
  EXPECT_EQ(s.judged_samples, 30u);
  ASSERT_EQ(s.techniques.size(), 3u);
  for (std::size_t i = 1; i < s.techniques.size(); ++i) EXPECT_GE(s.techniques[i - 1].e_g, s.techniques[i].e_g);
  for (const auto& t : s.techniques) EXPECT_EQ(t.instances, 30u);
  EXPECT_EQ(*s.metrics.best_e_g, s.techniques.front().e_g);
  ASSERT_TRUE(s.verdict);
  EXPECT_EQ(*s.verdict, evaluate_gate(s.metrics, th));
  EXPECT_TRUE(s.missing.empty());
}

TEST(GateSnapshot, PartiallyRatedSamplesAreLeftOut) {
  auto r = make_run(60, 10);
  // Drop one rating: that sample no longer has the full rater count.
  const std::string partial = r.annotations.back().sample_id;
  r.annotations.pop_back();
  const auto s = compute_gate_snapshot(r.scores, r.annotations, r.saliency, financial_lexicon(), {}, 0.5, 0.5, 3);
  EXPECT_EQ(s.judged_samples, 9u);
  std::vector<AnnotationRecord> full;
  for (const auto& a : r.annotations) {
    if (a.sample_id != partial) full.push_back(a);
  }
  EXPECT_EQ(*s.metrics.kappa_y, fleiss_kappa(build_matrix(full, RatingTarget::decision())).clamped_kappa);
}

TEST(GateSnapshot, MissingDataLeavesVerdictOpen) {
  const auto r = make_run(20, 0);
  const auto s = compute_gate_snapshot(r.scores, {}, r.saliency, financial_lexicon(), {}, 0.5, 0.5, 3);
  EXPECT_FALSE(s.verdict);
  EXPECT_EQ(s.missing, (std::vector<std::string>{"kappa_y", "best_e_g"}));
  const Json j = to_json(s);
  EXPECT_TRUE(j["verdict"].is_null());
  EXPECT_TRUE(j["conditions"].is_null());

  const auto empty = compute_gate_snapshot({}, {}, {}, financial_lexicon(), {}, 0.5, 0.5, 3);
  EXPECT_EQ(empty.missing.size(), 4u);
  EXPECT_TRUE(to_json(empty)["dataset"].is_null());
}

}  // namespace
}  // namespace veridical
