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

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace veridical {

struct InstanceScore {
  std::string instance_id;
  double entropy = 0.0;     // normalized to [0, 1]
  double perplexity = 1.0;  // >= 1
  std::size_t token_count = 0;

  bool operator==(const InstanceScore&) const = default;
};

struct DatasetScore {
  double entropy = 0.0;
  double perplexity = 1.0;
  std::size_t instance_count = 0;
};

struct QualityReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

struct WindowConfig {
  std::size_t window = 512;
  std::size_t stride = 256;
};

// Shannon entropy of the class distribution divided by log(C).
// Errors: kNotNormalized, kSingleClass.
double decision_entropy(const std::map<std::string, double>& decision_probs);

// One strided segment of the sliding-window evaluation. Tokens
// [begin, end) are scored with context starting at context_begin.
struct PerplexitySegment {
  std::size_t context_begin = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  double log_likelihood = 0.0;
};

// Errors: kEmptySequence, kInvalidWindow (needs 1 <= stride <= window).
std::vector<PerplexitySegment> perplexity_segments(std::span<const TokenLogprob> tokens,
                                                   std::size_t window, std::size_t stride);

// exp of the mean negative log-likelihood, accumulated segment by segment.
double instance_perplexity(std::span<const TokenLogprob> tokens, std::size_t window,
                           std::size_t stride);

InstanceScore score_instance(const DecisionTrace& trace, const WindowConfig& config = {});
std::vector<InstanceScore> score_traces(std::span<const DecisionTrace> traces,
                                        const WindowConfig& config = {});

// Entropy: mean of instance entropies. Perplexity: exp of the
// token-count-weighted mean NLL. Errors: kEmptyDataset.
DatasetScore dataset_scores(std::span<const InstanceScore> scores);

// Binary confusion-matrix metrics with `positive_class` as the positive
// label. MCC is 0 when any marginal is empty. Errors: kMissingLabel.
QualityReport quality_report(std::span<const DecisionTrace> traces,
                             std::span<const GroundTruthLabel> labels,
                             const std::string& positive_class);
QualityReport quality_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

Json to_json(const InstanceScore& score);
InstanceScore instance_score_from_json(const Json& j, std::size_t line = 0);
std::vector<InstanceScore> parse_score_file(const std::filesystem::path& path);

}  // namespace veridical
