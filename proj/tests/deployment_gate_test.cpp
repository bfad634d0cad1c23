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

#include "veridical/deployment_gate.h"

#include "test_util.h"

#include <gtest/gtest.h>

#include <random>

namespace veridical {
namespace {

GateMetrics llama_metrics() { return {0.8, 0.8, 0.1, 34.0}; }

IterationRecord record(int n, bool passed) {
  IterationRecord r;
  r.iteration = n;
  r.passed = passed;
  return r;
}

TEST(Gate, LlamaValuesPass) { EXPECT_TRUE(evaluate_gate(llama_metrics(), GateThresholds{})); }

TEST(Gate, BoundariesAreInclusive) {
  GateThresholds t;
  EXPECT_TRUE(evaluate_gate({t.kappa_min, t.explanation_min, t.entropy_max, t.perplexity_max}, t));
}

TEST(Gate, TruthTableOfSubConditions) {
  const GateThresholds t;
  for (int mask = 0; mask < 16; ++mask) {
    const bool k = mask & 1, e = mask & 2, h = mask & 4, p = mask & 8;
    GateMetrics m{k ? 0.9 : 0.5, e ? 0.9 : 0.5, h ? 0.05 : 0.5, p ? 20.0 : 80.0};
    const auto c = gate_conditions(m, t);
    EXPECT_EQ(c.kappa, k);
    EXPECT_EQ(c.explanation, e);
    EXPECT_EQ(c.entropy, h);
    EXPECT_EQ(c.perplexity, p);
    EXPECT_EQ(evaluate_gate(m, t), mask == 15) << mask;
  }
}

TEST(Gate, MissingMetric) {
  auto m = llama_metrics();
  m.dataset_perplexity.reset();
  EXPECT_ERROR_CODE(evaluate_gate(m, GateThresholds{}), ErrorCode::kMissingMetric);
  EXPECT_ERROR_CODE(evaluate_gate(metrics_from_json(Json::parse(R"({"kappa_y":0.9})")), GateThresholds{}),
                    ErrorCode::kMissingMetric);
}

TEST(Gate, MonotoneUnderImprovement) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> ppl(1.0, 100.0);
  const GateThresholds t{0.6, 0.6, 0.3, 50.0};
  for (int i = 0; i < 5000; ++i) {
    GateMetrics m{u(rng), u(rng), u(rng), ppl(rng)};
    GateMetrics better{*m.kappa_y + u(rng) * (1 - *m.kappa_y), *m.best_e_g + u(rng) * (1 - *m.best_e_g),
                       *m.dataset_entropy * u(rng), 1 + (*m.dataset_perplexity - 1) * u(rng)};
    if (evaluate_gate(m, t)) EXPECT_TRUE(evaluate_gate(better, t));
  }
}

TEST(Gate, ThresholdValidation) {
  EXPECT_ERROR_CODE((GateThresholds{1.2, 0.7, 0.1, 40}.validate()), ErrorCode::kInvalidConfig);
  EXPECT_ERROR_CODE((GateThresholds{0.7, 0.7, 0.1, 0.5}.validate()), ErrorCode::kInvalidConfig);
  EXPECT_EQ(thresholds_from_json(to_json(GateThresholds{})), GateThresholds{});
}

TEST(Loop, ThirdIterationDeploys) {
  std::vector<IterationRecord> h{record(1, false), record(2, false), record(3, true)};
  EXPECT_EQ(advance_loop(h, 5), LoopVerdict::kDeploy);
  EXPECT_EQ(advance_loop(std::span(h).first(2), 3), LoopVerdict::kContinueRetraining);
}

TEST(Loop, AbortAtMaximum) {
  std::vector<IterationRecord> h;
  for (int i = 1; i <= 5; ++i) h.push_back(record(i, false));
  EXPECT_EQ(advance_loop(h, 5), LoopVerdict::kAbortMaxReached);
  EXPECT_EQ(advance_loop(std::span(h).first(3), 3), LoopVerdict::kAbortMaxReached);
}

TEST(Loop, FirstFailureContinues) {
  std::vector<IterationRecord> h{record(1, false)};
  EXPECT_EQ(advance_loop(h, 3), LoopVerdict::kContinueRetraining);
}

TEST(Loop, Errors) {
  EXPECT_ERROR_CODE(advance_loop({}, 3), ErrorCode::kEmptyState);
  std::vector<IterationRecord> gap{record(1, false), record(3, true)};
  EXPECT_ERROR_CODE(advance_loop(gap, 3), ErrorCode::kRejectedPrecondition);
}

TEST(Loop, ReplayIsDeterministic) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    std::vector<IterationRecord> h;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 1; i <= n; ++i) h.push_back(record(i, rng() % 4 == 0));
    const int max = 1 + static_cast<int>(rng() % 6);
    EXPECT_EQ(advance_loop(h, max), advance_loop(std::vector<IterationRecord>(h), max));
  }
}

TEST(History, AppendsNumberedRecordsAndReloads) {
  testing::TempDir dir;
  GateHistory history(dir.path() / "gate");
  EXPECT_TRUE(history.load("llama3").empty());
  GateMetrics failing{0.5, 0.8, 0.1, 34.0};
  auto t0 = Timestamp::parse("2026-01-01T00:00:00.000Z");
  EXPECT_FALSE(history.append("llama3", failing, GateThresholds{}, t0).passed);
  EXPECT_FALSE(history.append("llama3", failing, GateThresholds{}, t0).passed);
  auto third = history.append("llama3", llama_metrics(), GateThresholds{}, t0);
  EXPECT_EQ(third.iteration, 3);
  EXPECT_TRUE(third.passed);
  auto loaded = history.load("llama3");
  ASSERT_EQ(loaded.size(), 3u);
  EXPECT_EQ(loaded[2], third);
  EXPECT_EQ(advance_loop(loaded, 5), LoopVerdict::kDeploy);
  EXPECT_TRUE(history.load("other").empty());
  EXPECT_ERROR_CODE(history.load("../x"), ErrorCode::kRejectedPrecondition);
}

}  // namespace
}  // namespace veridical
