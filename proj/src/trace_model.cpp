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

#include "veridical/trace_model.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <utility>

namespace veridical {
namespace {

void reject_unknown_fields(const Json& j, std::initializer_list<std::string_view> allowed,
                           std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "record is not an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw MalformedRecord(line, "unexpected field '" + key + "'");
    }
  }
}

std::vector<WordScore> word_scores_from_json(const Json& j, std::string_view field,
                                             std::size_t line) {
  const Json& arr = require_field(j, field, line);
  if (!arr.is_array()) throw MalformedRecord(line, std::string(field) + " must be an array");
  std::vector<WordScore> out;
  out.reserve(arr.size());
  for (const Json& item : arr) {
    out.push_back({require_string(item, "word", line), require_number(item, "score", line)});
  }
  return out;
}

Json word_scores_to_json(const std::vector<WordScore>& scores) {
  Json arr = Json::array();
  for (const auto& ws : scores) arr.push_back({{"word", ws.word}, {"score", ws.score}});
  return arr;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

template <typename T, typename FromJson, typename Check>
ParseResult<T> parse_lines(std::istream& in, FromJson from_json, Check check) {
  ParseResult<T> result;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (is_blank(text)) continue;
    ++result.lines_read;
    try {
      Json j = parse_record_line(text, line);
      T record = from_json(j, line);
      check(record, line);
      result.records.push_back(std::move(record));
    } catch (const MalformedRecord& e) {
      result.errors.push_back({line, ErrorCode::kMalformedRecord, e.reason()});
    } catch (const Error& e) {
      result.errors.push_back({line, e.code(), e.detail()});
    }
  }
  return result;
}

template <typename T>
std::vector<T> strict(ParseResult<T> result) {
  if (!result.errors.empty()) {
    const RecordError& e = result.errors.front();
    if (e.code == ErrorCode::kMalformedRecord) throw MalformedRecord(e.line, e.message);
    throw Error(e.code, "line " + std::to_string(e.line) + ": " + e.message);
  }
  return std::move(result.records);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::string_view to_string(Judgment j) {
  return j == Judgment::kAgree ? "agree" : "disagree";
}

std::string_view to_string(Quality q) {
  switch (q) {
    case Quality::kPoor: return "poor";
    case Quality::kModerate: return "moderate";
    case Quality::kGood: return "good";
    case Quality::kExcellent: return "excellent";
  }
  return "poor";
}

Judgment parse_judgment(std::string_view s) {
  if (s == "agree") return Judgment::kAgree;
  if (s == "disagree") return Judgment::kDisagree;
  throw Error(ErrorCode::kUnknownCategory, "decision judgment '" + std::string(s) + "'");
}

Quality parse_quality(std::string_view s) {
  if (s == "poor") return Quality::kPoor;
  if (s == "moderate") return Quality::kModerate;
  if (s == "good") return Quality::kGood;
  if (s == "excellent") return Quality::kExcellent;
  throw Error(ErrorCode::kUnknownCategory, "explanation quality '" + std::string(s) + "'");
}

std::string argmax_class(const std::map<std::string, double>& probs) {
  // std::map iterates labels in lexicographic order, so strict '>' keeps the
  // smallest label among tied maxima.
  std::string best;
  double best_p = -1.0;
  for (const auto& [label, p] : probs) {
    if (p > best_p) {
      best = label;
      best_p = p;
    }
  }
  return best;
}

void validate(const DecisionTrace& trace) {
  if (trace.instance_id.empty()) throw Error(ErrorCode::kMalformedRecord, "empty instance_id");
  if (trace.decision_probs.size() < 2) {
    throw Error(ErrorCode::kMalformedRecord, "decision_probs needs at least two classes");
  }
  double sum = 0.0;
  for (const auto& [label, p] : trace.decision_probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw Error(ErrorCode::kMalformedRecord, "probability for '" + label + "' outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw Error(ErrorCode::kProbabilityNotNormalized,
                trace.instance_id + ": decision_probs sum to " + format_decimal(sum));
  }
  if (trace.predicted_class != argmax_class(trace.decision_probs)) {
    throw Error(ErrorCode::kMalformedRecord,
                trace.instance_id + ": predicted_class '" + trace.predicted_class +
                    "' is not the argmax of decision_probs");
  }
  for (const auto& t : trace.token_logprobs) {
    if (!std::isfinite(t.logprob) || t.logprob > 0.0) {
      throw Error(ErrorCode::kMalformedRecord, trace.instance_id + ": logprob must be <= 0");
    }
  }
}

void validate(const SaliencyRecord& record) {
  if (record.instance_id.empty()) throw Error(ErrorCode::kMalformedRecord, "empty instance_id");
  if (record.technique_id.empty()) throw Error(ErrorCode::kMalformedRecord, "empty technique_id");
  if (record.original_scores.empty() || record.perturbed_scores.empty()) {
    throw Error(ErrorCode::kEmptySaliency, record.instance_id + ": empty word sequence");
  }
  for (const auto* side : {&record.original_scores, &record.perturbed_scores}) {
    for (const auto& ws : *side) {
      if (!std::isfinite(ws.score)) {
        throw Error(ErrorCode::kMalformedRecord, record.instance_id + ": non-finite score");
      }
    }
  }
}

Json to_json(const DecisionTrace& trace) {
  Json probs = Json::object();
  for (const auto& [label, p] : trace.decision_probs) probs[label] = p;
  Json tokens = Json::array();
  for (const auto& t : trace.token_logprobs) tokens.push_back({{"token", t.token}, {"logprob", t.logprob}});
  return {{"instance_id", trace.instance_id},       {"model_id", trace.model_id},
          {"prompt_text", trace.prompt_text},       {"response_text", trace.response_text},
          {"predicted_class", trace.predicted_class}, {"decision_probs", std::move(probs)},
          {"token_logprobs", std::move(tokens)}};
}

DecisionTrace trace_from_json(const Json& j, std::size_t line) {
  reject_unknown_fields(j,
                        {"instance_id", "model_id", "prompt_text", "response_text",
                         "predicted_class", "decision_probs", "token_logprobs"},
                        line);
  DecisionTrace t;
  t.instance_id = require_string(j, "instance_id", line);
  t.model_id = require_string(j, "model_id", line);
  t.prompt_text = require_string(j, "prompt_text", line);
  t.response_text = require_string(j, "response_text", line);
  t.predicted_class = require_string(j, "predicted_class", line);
  const Json& probs = require_field(j, "decision_probs", line);
  if (!probs.is_object()) throw MalformedRecord(line, "decision_probs must be an object");
  for (const auto& [label, p] : probs.items()) {
    if (!p.is_number()) throw MalformedRecord(line, "probability for '" + label + "' not a number");
    t.decision_probs[label] = p.get<double>();
  }
  const Json& tokens = require_field(j, "token_logprobs", line);
  if (!tokens.is_array()) throw MalformedRecord(line, "token_logprobs must be an array");
  t.token_logprobs.reserve(tokens.size());
  for (const Json& item : tokens) {
    t.token_logprobs.push_back({require_string(item, "token", line), require_number(item, "logprob", line)});
  }
  return t;
}

Json to_json(const SaliencyRecord& record) {
  return {{"instance_id", record.instance_id},
          {"technique_id", record.technique_id},
          {"original_scores", word_scores_to_json(record.original_scores)},
          {"perturbed_instance_id", record.perturbed_instance_id},
          {"perturbed_scores", word_scores_to_json(record.perturbed_scores)}};
}

SaliencyRecord saliency_from_json(const Json& j, std::size_t line) {
  reject_unknown_fields(j,
                        {"instance_id", "technique_id", "original_scores", "perturbed_instance_id",
                         "perturbed_scores"},
                        line);
  SaliencyRecord r;
  r.instance_id = require_string(j, "instance_id", line);
  r.technique_id = require_string(j, "technique_id", line);
  r.original_scores = word_scores_from_json(j, "original_scores", line);
  r.perturbed_instance_id = require_string(j, "perturbed_instance_id", line);
  r.perturbed_scores = word_scores_from_json(j, "perturbed_scores", line);
  return r;
}

Json to_json(const AnnotationRecord& record) {
  Json quality = Json::object();
  for (const auto& [tech, q] : record.explanation_quality) quality[tech] = to_string(q);
  Json j = {{"sample_id", record.sample_id},
            {"evaluator_id", record.evaluator_id},
            {"decision_judgment", to_string(record.decision_judgment)},
            {"explanation_quality", std::move(quality)},
            {"timestamp", record.timestamp.to_string()}};
  if (record.iteration) j["iteration"] = *record.iteration;
  return j;
}

AnnotationRecord annotation_from_json(const Json& j, std::size_t line) {
  reject_unknown_fields(j,
                        {"sample_id", "evaluator_id", "decision_judgment", "explanation_quality",
                         "timestamp", "iteration"},
                        line);
  AnnotationRecord r;
  r.sample_id = require_string(j, "sample_id", line);
  r.evaluator_id = require_string(j, "evaluator_id", line);
  if (r.sample_id.empty() || r.evaluator_id.empty()) {
    throw MalformedRecord(line, "sample_id and evaluator_id must be non-empty");
  }
  r.decision_judgment = parse_judgment(require_string(j, "decision_judgment", line));
  const Json& quality = require_field(j, "explanation_quality", line);
  if (!quality.is_object()) throw MalformedRecord(line, "explanation_quality must be an object");
  for (const auto& [tech, q] : quality.items()) {
    if (!q.is_string()) throw MalformedRecord(line, "quality rating must be a string");
    r.explanation_quality[tech] = parse_quality(q.get<std::string>());
  }
  try {
    r.timestamp = Timestamp::parse(require_string(j, "timestamp", line));
  } catch (const MalformedRecord&) {
    throw;
  } catch (const Error& e) {
    throw MalformedRecord(line, e.detail());
  }
  if (auto it = j.find("iteration"); it != j.end()) {
    if (!it->is_number_integer() || it->get<int>() < 1) {
      throw MalformedRecord(line, "iteration must be an integer >= 1");
    }
    r.iteration = it->get<int>();
  }
  return r;
}

Json to_json(const GroundTruthLabel& label) {
  return {{"instance_id", label.instance_id}, {"true_class", label.true_class}};
}

GroundTruthLabel label_from_json(const Json& j, std::size_t line) {
  reject_unknown_fields(j, {"instance_id", "true_class"}, line);
  return {require_string(j, "instance_id", line), require_string(j, "true_class", line)};
}

ParseResult<DecisionTrace> parse_traces_lenient(std::istream& in) {
  std::set<std::string> seen;
  return parse_lines<DecisionTrace>(in, trace_from_json, [&](const DecisionTrace& t, std::size_t) {
    validate(t);
    if (!seen.insert(t.instance_id).second) {
      throw Error(ErrorCode::kDuplicateInstanceId, "instance_id '" + t.instance_id + "' repeated");
    }
  });
}

ParseResult<SaliencyRecord> parse_saliency_lenient(std::istream& in) {
  std::set<std::pair<std::string, std::string>> seen;
  return parse_lines<SaliencyRecord>(in, saliency_from_json,
                                     [&](const SaliencyRecord& r, std::size_t) {
                                       validate(r);
                                       if (!seen.insert({r.instance_id, r.technique_id}).second) {
                                         throw Error(ErrorCode::kDuplicateInstanceId,
                                                     r.instance_id + "/" + r.technique_id +
                                                         " repeated");
                                       }
                                     });
}

ParseResult<AnnotationRecord> parse_annotations_lenient(std::istream& in) {
  std::set<std::pair<std::string, std::string>> seen;
  return parse_lines<AnnotationRecord>(
      in, annotation_from_json, [&](const AnnotationRecord& r, std::size_t) {
        if (!seen.insert({r.sample_id, r.evaluator_id}).second) {
          throw Error(ErrorCode::kDuplicateAnnotation,
                      "evaluator '" + r.evaluator_id + "' already rated '" + r.sample_id + "'");
        }
      });
}

ParseResult<GroundTruthLabel> parse_labels_lenient(std::istream& in,
                                                   const std::set<std::string>& label_set) {
  std::set<std::string> seen;
  return parse_lines<GroundTruthLabel>(in, label_from_json, [&](const GroundTruthLabel& l, std::size_t) {
    if (!label_set.empty() && !label_set.contains(l.true_class)) {
      throw Error(ErrorCode::kUnknownCategory, "label '" + l.true_class + "' not in label set");
    }
    if (!seen.insert(l.instance_id).second) {
      throw Error(ErrorCode::kDuplicateInstanceId, "instance_id '" + l.instance_id + "' repeated");
    }
  });
}

std::vector<DecisionTrace> parse_trace_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return strict(parse_traces_lenient(in));
}

std::vector<SaliencyRecord> parse_saliency_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return strict(parse_saliency_lenient(in));
}

std::vector<AnnotationRecord> parse_annotation_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return strict(parse_annotations_lenient(in));
}

std::vector<GroundTruthLabel> parse_label_file(const std::filesystem::path& path,
                                               const std::set<std::string>& label_set) {
  auto in = open_input(path);
  return strict(parse_labels_lenient(in, label_set));
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kStoreUnavailable, "cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kStoreUnavailable, "short write to '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace veridical
