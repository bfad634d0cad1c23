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
#include "veridical/error.h"
#include "veridical/timestamp.h"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace veridical {

constexpr double kProbabilitySumTolerance = 1e-6;

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;  // log-probability of the realized token, <= 0

  bool operator==(const TokenLogprob&) const = default;
};

// One model decision on one instance.
struct DecisionTrace {
  std::string instance_id;
  std::string model_id;
  std::string prompt_text;
  std::string response_text;
  std::string predicted_class;
  std::map<std::string, double> decision_probs;
  std::vector<TokenLogprob> token_logprobs;

  bool operator==(const DecisionTrace&) const = default;
};

struct WordScore {
  std::string word;
  double score = 0.0;

  bool operator==(const WordScore&) const = default;
};

// Per-word attributions of one XAI technique for an instance and its
// meaning-preserving perturbation.
struct SaliencyRecord {
  std::string instance_id;
  std::string technique_id;
  std::vector<WordScore> original_scores;
  std::string perturbed_instance_id;
  std::vector<WordScore> perturbed_scores;

  bool operator==(const SaliencyRecord&) const = default;
};

enum class Judgment { kAgree, kDisagree };
enum class Quality { kPoor, kModerate, kGood, kExcellent };

std::string_view to_string(Judgment j);
std::string_view to_string(Quality q);
// Throw ErrorCode::kUnknownCategory on anything outside the fixed sets.
Judgment parse_judgment(std::string_view s);
Quality parse_quality(std::string_view s);

struct AnnotationRecord {
  std::string sample_id;
  std::string evaluator_id;
  Judgment decision_judgment = Judgment::kAgree;
  std::map<std::string, Quality> explanation_quality;  // technique_id -> rating
  Timestamp timestamp;
  // Retraining cycle the judgment belongs to; absent means "not tracked".
  std::optional<int> iteration;

  bool operator==(const AnnotationRecord&) const = default;
};

struct GroundTruthLabel {
  std::string instance_id;
  std::string true_class;

  bool operator==(const GroundTruthLabel&) const = default;
};

// Argmax with ties broken by the lexicographically smallest label.
std::string argmax_class(const std::map<std::string, double>& probs);

// Invariant checks shared by the parsers and the HTTP ingest path.
void validate(const DecisionTrace& trace);
void validate(const SaliencyRecord& record);

Json to_json(const DecisionTrace& trace);
Json to_json(const SaliencyRecord& record);
Json to_json(const AnnotationRecord& record);
Json to_json(const GroundTruthLabel& label);

// `line` is only used to label MalformedRecord errors.
DecisionTrace trace_from_json(const Json& j, std::size_t line = 0);
SaliencyRecord saliency_from_json(const Json& j, std::size_t line = 0);
AnnotationRecord annotation_from_json(const Json& j, std::size_t line = 0);
GroundTruthLabel label_from_json(const Json& j, std::size_t line = 0);

struct RecordError {
  std::size_t line = 0;
  ErrorCode code = ErrorCode::kMalformedRecord;
  std::string message;
};

// Lenient parse: every non-blank input line ends up either in `records` or
// in `errors`, never silently dropped.
template <typename T>
struct ParseResult {
  std::vector<T> records;
  std::vector<RecordError> errors;
  std::size_t lines_read = 0;
};

ParseResult<DecisionTrace> parse_traces_lenient(std::istream& in);
ParseResult<SaliencyRecord> parse_saliency_lenient(std::istream& in);
ParseResult<AnnotationRecord> parse_annotations_lenient(std::istream& in);
ParseResult<GroundTruthLabel> parse_labels_lenient(std::istream& in,
                                                   const std::set<std::string>& label_set = {});

// Strict parses throw the first error encountered.
std::vector<DecisionTrace> parse_trace_file(const std::filesystem::path& path);
std::vector<SaliencyRecord> parse_saliency_file(const std::filesystem::path& path);
std::vector<AnnotationRecord> parse_annotation_file(const std::filesystem::path& path);
std::vector<GroundTruthLabel> parse_label_file(const std::filesystem::path& path,
                                               const std::set<std::string>& label_set = {});

// One canonical record per line, '\n' terminated.
template <typename T>
std::string to_jsonl(std::span<const T> records) {
  std::string out;
  for (const auto& r : records) {
    out += canonical_dump(to_json(r));
    out.push_back('\n');
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

template <typename T>
void write_jsonl(const std::filesystem::path& path, std::span<const T> records) {
  write_text_file(path, to_jsonl(records));
}

// Deterministic synthetic traces spanning the low/medium/high uncertainty
// regions, with balance-sheet style prompts. n must be >= 1.
std::vector<DecisionTrace> generate_fixtures(std::uint64_t seed, std::size_t n,
                                             const std::string& model_id = "llama3-8b-sim");

}  // namespace veridical
