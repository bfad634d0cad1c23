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

#include "veridical/error.h"
#include "veridical/trace_model.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace veridical {

void GateThresholds::validate() const {
  auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!unit(kappa_min)) throw Error(ErrorCode::kInvalidConfig, "kappa_min must lie in [0, 1]");
  if (!unit(explanation_min)) throw Error(ErrorCode::kInvalidConfig, "explanation_min must lie in [0, 1]");
  if (!unit(entropy_max)) throw Error(ErrorCode::kInvalidConfig, "entropy_max must lie in [0, 1]");
  if (!std::isfinite(perplexity_max) || perplexity_max < 1.0) {
    throw Error(ErrorCode::kInvalidConfig, "perplexity_max must be >= 1");
  }
}

namespace {

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw Error(ErrorCode::kMissingMetric, name);
  return *v;
}

}  // namespace

GateConditions gate_conditions(const GateMetrics& m, const GateThresholds& t) {
  GateConditions c;
  c.kappa = need(m.kappa_y, "kappa_y") >= t.kappa_min;
  c.explanation = need(m.best_e_g, "best_e_g") >= t.explanation_min;
  c.entropy = need(m.dataset_entropy, "dataset_entropy") <= t.entropy_max;
  c.perplexity = need(m.dataset_perplexity, "dataset_perplexity") <= t.perplexity_max;
  return c;
}

bool evaluate_gate(const GateMetrics& metrics, const GateThresholds& thresholds) {
  return gate_conditions(metrics, thresholds).all();
}

std::string_view to_string(LoopVerdict v) {
  switch (v) {
    case LoopVerdict::kContinueRetraining: return "continue_retraining";
    case LoopVerdict::kDeploy: return "deploy";
    case LoopVerdict::kAbortMaxReached: return "abort_max_reached";
  }
  return "continue_retraining";
}

void validate_history(std::span<const IterationRecord> history) {
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (history[i].iteration != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::kRejectedPrecondition,
                  "iteration " + std::to_string(history[i].iteration) + " at position " + std::to_string(i + 1));
    }
  }
}

LoopVerdict advance_loop(std::span<const IterationRecord> history, int max_iterations) {
  if (history.empty()) throw Error(ErrorCode::kEmptyState, "no iterations recorded");
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidConfig, "max_iterations must be >= 1");
  validate_history(history);
  const auto& last = history.back();
  if (last.passed) return LoopVerdict::kDeploy;
  if (last.iteration >= max_iterations) return LoopVerdict::kAbortMaxReached;
  return LoopVerdict::kContinueRetraining;
}

Json to_json(const GateThresholds& t) {
  return Json{{"entropy_max", t.entropy_max},
              {"explanation_min", t.explanation_min},
              {"kappa_min", t.kappa_min},
              {"perplexity_max", t.perplexity_max}};
}

GateThresholds thresholds_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "thresholds must be an object");
  GateThresholds t;
  auto read = [&](const char* key, double& out) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::kInvalidConfig, std::string("missing threshold ") + key);
    if (!it->is_number()) throw Error(ErrorCode::kInvalidConfig, std::string(key) + " must be a number");
    out = it->get<double>();
  };
  read("kappa_min", t.kappa_min);
  read("explanation_min", t.explanation_min);
  read("entropy_max", t.entropy_max);
  read("perplexity_max", t.perplexity_max);
  t.validate();
  return t;
}

Json to_json(const GateMetrics& m) {
  Json j = Json::object();
  if (m.kappa_y) j["kappa_y"] = *m.kappa_y;
  if (m.best_e_g) j["best_e_g"] = *m.best_e_g;
  if (m.dataset_entropy) j["dataset_entropy"] = *m.dataset_entropy;
  if (m.dataset_perplexity) j["dataset_perplexity"] = *m.dataset_perplexity;
  return j;
}

GateMetrics metrics_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "metrics must be an object");
  GateMetrics m;
  auto read = [&](const char* key, std::optional<double>& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    if (!it->is_number()) throw Error(ErrorCode::kMalformedRecord, std::string(key) + " must be a number");
    out = it->get<double>();
  };
  read("kappa_y", m.kappa_y);
  read("best_e_g", m.best_e_g);
  read("dataset_entropy", m.dataset_entropy);
  read("dataset_perplexity", m.dataset_perplexity);
  return m;
}

Json to_json(const IterationRecord& r) {
  return Json{{"best_e_g", r.best_e_g},
              {"dataset_entropy", r.dataset_entropy},
              {"dataset_perplexity", r.dataset_perplexity},
              {"iteration", r.iteration},
              {"kappa_y", r.kappa_y},
              {"passed", r.passed},
              {"thresholds", to_json(r.thresholds)},
              {"timestamp", r.timestamp.to_string()}};
}

IterationRecord iteration_from_json(const Json& j, std::size_t line) {
  try {
    IterationRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.kappa_y = j.at("kappa_y").get<double>();
    r.best_e_g = j.at("best_e_g").get<double>();
    r.dataset_entropy = j.at("dataset_entropy").get<double>();
    r.dataset_perplexity = j.at("dataset_perplexity").get<double>();
    r.passed = j.at("passed").get<bool>();
    r.timestamp = Timestamp::parse(j.at("timestamp").get<std::string>());
    r.thresholds = thresholds_from_json(j.at("thresholds"));
    return r;
  } catch (const Json::exception& e) {
    throw MalformedRecord(line, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedRecord) throw;
    throw MalformedRecord(line, e.detail());
  }
}

GateHistory::GateHistory(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path GateHistory::file_for(const std::string& model_id) const {
  if (model_id.empty() || model_id.find_first_of("/\\") != std::string::npos || model_id[0] == '.') {
    throw Error(ErrorCode::kRejectedPrecondition, "invalid model id '" + model_id + "'");
  }
  return dir_ / (model_id + ".jsonl");
}

std::vector<IterationRecord> GateHistory::load(const std::string& model_id) const {
  std::lock_guard lock(mu_);
  return load_locked(model_id);
}

std::vector<IterationRecord> GateHistory::load_locked(const std::string& model_id) const {
  const auto path = file_for(model_id);
  std::vector<IterationRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(iteration_from_json(parse_record_line(line, n), n));
  }
  validate_history(out);
  return out;
}

IterationRecord GateHistory::append(const std::string& model_id, const GateMetrics& metrics,
                                    const GateThresholds& thresholds, Timestamp at) {
  thresholds.validate();
  const bool passed = evaluate_gate(metrics, thresholds);
  std::lock_guard lock(mu_);
  auto history = load_locked(model_id);
  IterationRecord r;
  r.iteration = static_cast<int>(history.size()) + 1;
  r.kappa_y = *metrics.kappa_y;
  r.best_e_g = *metrics.best_e_g;
  r.dataset_entropy = *metrics.dataset_entropy;
  r.dataset_perplexity = *metrics.dataset_perplexity;
  r.passed = passed;
  r.timestamp = at;
  r.thresholds = thresholds;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  std::ofstream out(file_for(model_id), std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kStoreUnavailable, "cannot append to gate history for " + model_id);
  out << canonical_dump(to_json(r)) << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kStoreUnavailable, "write failed for gate history " + model_id);
  return r;
}

}  // namespace veridical
