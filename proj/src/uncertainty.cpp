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

#include "veridical/uncertainty.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace veridical {

double decision_entropy(const std::map<std::string, double>& decision_probs) {
  if (decision_probs.size() < 2) {
    throw Error(ErrorCode::kSingleClass, "entropy needs at least two classes");
  }
  double sum = 0.0;
  double h = 0.0;
  for (const auto& [label, p] : decision_probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kNotNormalized, "invalid probability for '" + label + "'");
    }
    sum += p;
    if (p > 0.0) h -= p * std::log2(p);  // 0 log 0 := 0
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw Error(ErrorCode::kNotNormalized, "probabilities sum to " + format_decimal(sum));
  }
  h /= std::log2(static_cast<double>(decision_probs.size()));
  return std::clamp(h, 0.0, 1.0);
}

std::vector<PerplexitySegment> perplexity_segments(std::span<const TokenLogprob> tokens,
                                                   std::size_t window, std::size_t stride) {
  if (tokens.empty()) throw Error(ErrorCode::kEmptySequence, "no tokens to score");
  if (stride < 1 || stride > window) {
    throw Error(ErrorCode::kInvalidWindow, "need 1 <= stride <= window, got stride " +
                                               std::to_string(stride) + ", window " +
                                               std::to_string(window));
  }
  std::vector<PerplexitySegment> segments;
  segments.reserve(tokens.size() / stride + 1);
  for (std::size_t begin = 0; begin < tokens.size(); begin += stride) {
    PerplexitySegment seg;
    seg.begin = begin;
    seg.end = std::min(begin + stride, tokens.size());
    seg.context_begin = seg.end > window ? seg.end - window : 0;
    for (std::size_t i = seg.begin; i < seg.end; ++i) seg.log_likelihood += tokens[i].logprob;
    segments.push_back(seg);
  }
  return segments;
}

double instance_perplexity(std::span<const TokenLogprob> tokens, std::size_t window,
                           std::size_t stride) {
  double total = 0.0;
  for (const auto& seg : perplexity_segments(tokens, window, stride)) total += seg.log_likelihood;
  return std::exp(-total / static_cast<double>(tokens.size()));
}

InstanceScore score_instance(const DecisionTrace& trace, const WindowConfig& config) {
  return {trace.instance_id, decision_entropy(trace.decision_probs),
          instance_perplexity(trace.token_logprobs, config.window, config.stride),
          trace.token_logprobs.size()};
}

std::vector<InstanceScore> score_traces(std::span<const DecisionTrace> traces,
                                        const WindowConfig& config) {
  std::vector<InstanceScore> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(score_instance(t, config));
  return out;
}

DatasetScore dataset_scores(std::span<const InstanceScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyDataset, "no instances to aggregate");
  double entropy_sum = 0.0;
  double weighted_nll = 0.0;
  double tokens = 0.0;
  for (const auto& s : scores) {
    if (s.token_count == 0) {
      throw Error(ErrorCode::kEmptySequence, s.instance_id + " has no scored tokens");
    }
    entropy_sum += s.entropy;
    weighted_nll += static_cast<double>(s.token_count) * std::log(s.perplexity);
    tokens += static_cast<double>(s.token_count);
  }
  return {entropy_sum / static_cast<double>(scores.size()), std::exp(weighted_nll / tokens),
          scores.size()};
}

QualityReport quality_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  QualityReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  const double dtp = static_cast<double>(tp);
  const double dfp = static_cast<double>(fp);
  const double dfn = static_cast<double>(fn);
  const double dtn = static_cast<double>(tn);
  r.precision = tp + fp > 0 ? dtp / (dtp + dfp) : 0.0;
  r.recall = tp + fn > 0 ? dtp / (dtp + dfn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  const double denom = (dtp + dfp) * (dtp + dfn) * (dtn + dfp) * (dtn + dfn);
  r.mcc = denom > 0 ? (dtp * dtn - dfp * dfn) / std::sqrt(denom) : 0.0;
  return r;
}

QualityReport quality_report(std::span<const DecisionTrace> traces,
                             std::span<const GroundTruthLabel> labels,
                             const std::string& positive_class) {
  std::map<std::string, std::string> truth;
  for (const auto& l : labels) truth[l.instance_id] = l.true_class;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& t : traces) {
    auto it = truth.find(t.instance_id);
    if (it == truth.end()) throw Error(ErrorCode::kMissingLabel, "no label for " + t.instance_id);
    const bool predicted = t.predicted_class == positive_class;
    const bool actual = it->second == positive_class;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return quality_from_counts(tp, fp, fn, tn);
}

Json to_json(const InstanceScore& score) {
  return {{"instance_id", score.instance_id},
          {"entropy", score.entropy},
          {"perplexity", score.perplexity},
          {"token_count", score.token_count}};
}

InstanceScore instance_score_from_json(const Json& j, std::size_t line) {
  InstanceScore s;
  s.instance_id = require_string(j, "instance_id", line);
  s.entropy = require_number(j, "entropy", line);
  s.perplexity = require_number(j, "perplexity", line);
  const Json& count = require_field(j, "token_count", line);
  if (!count.is_number_unsigned()) throw MalformedRecord(line, "token_count must be a count");
  s.token_count = count.get<std::size_t>();
  if (s.entropy < 0.0 || s.entropy > 1.0) throw MalformedRecord(line, "entropy outside [0,1]");
  if (s.perplexity < 1.0) throw MalformedRecord(line, "perplexity below 1");
  return s;
}

std::vector<InstanceScore> parse_score_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<InstanceScore> out;
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    out.push_back(instance_score_from_json(parse_record_line(text, line), line));
    if (!seen.insert(out.back().instance_id).second) {
      throw Error(ErrorCode::kDuplicateInstanceId, "line " + std::to_string(line) + ": " +
                                                       out.back().instance_id);
    }
  }
  return out;
}

}  // namespace veridical
