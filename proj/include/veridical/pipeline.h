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

#include "veridical/deployment_gate.h"
#include "veridical/human_eval.h"
#include "veridical/uncertainty.h"
#include "veridical/xai_stability.h"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace veridical {

struct TechniqueSummary {
  std::string technique_id;
  AgreementScore agreement;
  double mean_instability = 0.0;
  double similarity = 0.0;
  double e_g = 0.0;
  std::size_t instances = 0;
};

// Everything the gate looks at for one run directory, computed the same way
// for the CLI and the service.
struct GateSnapshot {
  GateThresholds thresholds;
  GateMetrics metrics;
  std::optional<DatasetScore> dataset;
  std::optional<AgreementScore> decision_agreement;
  std::vector<TechniqueSummary> techniques;  // ranked, best first
  std::size_t judged_samples = 0;
  std::vector<std::string> missing;  // metric names without data
  std::optional<bool> verdict;       // absent while a metric is missing
  GateConditions conditions;
};

// Only samples rated by exactly `raters_per_item` evaluators count toward
// agreement; stability is taken over those samples' saliency records.
GateSnapshot compute_gate_snapshot(std::span<const InstanceScore> scores,
                                   std::span<const AnnotationRecord> annotations,
                                   std::span<const SaliencyRecord> saliency, const SynonymLexicon& lexicon,
                                   const GateThresholds& thresholds, double beta1, double beta2,
                                   std::size_t raters_per_item);

Json to_json(const GateSnapshot& s);

// The plain record files a service run directory keeps under state/.
struct RunRecords {
  std::vector<DecisionTrace> traces;
  std::vector<SaliencyRecord> saliency;
  std::vector<AnnotationRecord> annotations;
};

// Missing files read as empty.
RunRecords load_run_records(const std::filesystem::path& data_dir);

}  // namespace veridical
