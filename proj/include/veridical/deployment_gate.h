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

#include "veridical/canonical_json.h"
#include "veridical/timestamp.h"

#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace veridical {

struct GateThresholds {
  double kappa_min = 0.7;
  double explanation_min = 0.7;
  double entropy_max = 0.164;
  double perplexity_max = 47.824;

  // kInvalidConfig when a value is outside its range.
  void validate() const;
  bool operator==(const GateThresholds&) const = default;
};

// Inputs to one gate evaluation. Any of them may be missing in a metrics
// file; evaluation then fails with kMissingMetric.
struct GateMetrics {
  std::optional<double> kappa_y;  // clamped Fleiss kappa on decisions
  std::optional<double> best_e_g;
  std::optional<double> dataset_entropy;
  std::optional<double> dataset_perplexity;
};

struct GateConditions {
  bool kappa = false;
  bool explanation = false;
  bool entropy = false;
  bool perplexity = false;

  bool all() const { return kappa && explanation && entropy && perplexity; }
};

GateConditions gate_conditions(const GateMetrics& metrics, const GateThresholds& thresholds);
bool evaluate_gate(const GateMetrics& metrics, const GateThresholds& thresholds);

struct IterationRecord {
  int iteration = 1;
  double kappa_y = 0.0;
  double best_e_g = 0.0;
  double dataset_entropy = 0.0;
  double dataset_perplexity = 0.0;
  bool passed = false;
  Timestamp timestamp;
  GateThresholds thresholds;

  bool operator==(const IterationRecord&) const = default;
};

enum class LoopVerdict { kContinueRetraining, kDeploy, kAbortMaxReached };
std::string_view to_string(LoopVerdict v);

// Iterations must read 1, 2, 3, ... ; kRejectedPrecondition otherwise.
void validate_history(std::span<const IterationRecord> history);

// Errors: kEmptyState, kInvalidConfig (max_iterations < 1).
LoopVerdict advance_loop(std::span<const IterationRecord> history, int max_iterations);

Json to_json(const GateThresholds& t);
GateThresholds thresholds_from_json(const Json& j);
Json to_json(const GateMetrics& m);
GateMetrics metrics_from_json(const Json& j);
Json to_json(const IterationRecord& r);
IterationRecord iteration_from_json(const Json& j, std::size_t line = 0);

// Append-only per-model iteration log under <dir>/<model>.jsonl.
class GateHistory {
 public:
  explicit GateHistory(std::filesystem::path dir);

  std::vector<IterationRecord> load(const std::string& model_id) const;
  // Evaluates, numbers and persists the next iteration.
  IterationRecord append(const std::string& model_id, const GateMetrics& metrics,
                         const GateThresholds& thresholds, Timestamp at);

 private:
  std::filesystem::path file_for(const std::string& model_id) const;
  std::vector<IterationRecord> load_locked(const std::string& model_id) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

}  // namespace veridical
