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

#include "veridical/error.h"

#include <algorithm>
#include <map>
#include <set>

namespace veridical {

GateSnapshot compute_gate_snapshot(std::span<const InstanceScore> scores,
                                   std::span<const AnnotationRecord> annotations,
                                   std::span<const SaliencyRecord> saliency, const SynonymLexicon& lexicon,
                                   const GateThresholds& thresholds, double beta1, double beta2,
                                   std::size_t raters_per_item) {
  GateSnapshot s;
  s.thresholds = thresholds;
  if (!scores.empty()) {
    s.dataset = dataset_scores(scores);
    s.metrics.dataset_entropy = s.dataset->entropy;
    s.metrics.dataset_perplexity = s.dataset->perplexity;
  }

  std::map<std::string, std::size_t> per_sample;
  for (const auto& a : annotations) ++per_sample[a.sample_id];
  std::set<std::string> complete;
  for (const auto& [id, n] : per_sample) {
    if (n == raters_per_item) complete.insert(id);
  }
  std::vector<AnnotationRecord> judged;
  std::set<std::string> techniques;
  for (const auto& a : annotations) {
    if (!complete.contains(a.sample_id)) continue;
    judged.push_back(a);
    for (const auto& [t, _] : a.explanation_quality) techniques.insert(t);
  }
  s.judged_samples = complete.size();

  if (!judged.empty()) {
    s.decision_agreement = fleiss_kappa(build_matrix(judged, RatingTarget::decision()));
    s.metrics.kappa_y = s.decision_agreement->clamped_kappa;
  }

  std::map<std::string, double> kappas;
  std::map<std::string, AgreementScore> agreements;
  for (const auto& t : techniques) {
    std::vector<AnnotationRecord> rated;
    std::map<std::string, std::size_t> counts;
    for (const auto& a : judged) {
      if (a.explanation_quality.contains(t)) ++counts[a.sample_id];
    }
    for (const auto& a : judged) {
      if (a.explanation_quality.contains(t) && counts[a.sample_id] == raters_per_item) rated.push_back(a);
    }
    if (rated.empty()) continue;
    agreements[t] = fleiss_kappa(build_matrix(rated, RatingTarget::explanation(t)));
    kappas[t] = agreements[t].clamped_kappa;
  }

  std::vector<SaliencyRecord> in_scope;
  for (const auto& r : saliency) {
    if (complete.contains(r.instance_id) && kappas.contains(r.technique_id)) in_scope.push_back(r);
  }
  if (!in_scope.empty()) {
    const auto report = build_stability_report(in_scope, lexicon, kappas, beta1, beta2);
    for (const auto& t : rank_techniques(report)) {
      TechniqueSummary ts;
      ts.technique_id = t;
      ts.agreement = agreements.at(t);
      ts.mean_instability = report.mean_instability.at(t);
      ts.similarity = report.per_technique_similarity.at(t);
      ts.e_g = report.combined.at(t);
      for (const auto& [key, _] : report.per_instance) ts.instances += key.second == t ? 1 : 0;
      s.techniques.push_back(std::move(ts));
    }
    s.metrics.best_e_g = s.techniques.front().e_g;
  }

  if (!s.metrics.kappa_y) s.missing.push_back("kappa_y");
  if (!s.metrics.best_e_g) s.missing.push_back("best_e_g");
  if (!s.metrics.dataset_entropy) s.missing.push_back("dataset_entropy");
  if (!s.metrics.dataset_perplexity) s.missing.push_back("dataset_perplexity");
  if (s.missing.empty()) {
    s.conditions = gate_conditions(s.metrics, thresholds);
    s.verdict = s.conditions.all();
  }
  return s;
}

Json to_json(const GateSnapshot& s) {
  Json techniques = Json::array();
  for (const auto& t : s.techniques) {
    techniques.push_back({{"agreement", to_json(t.agreement)},
                          {"e_g", t.e_g},
                          {"instances", t.instances},
                          {"mean_instability", t.mean_instability},
                          {"similarity", t.similarity},
                          {"technique_id", t.technique_id}});
  }
  Json j{{"judged_samples", s.judged_samples},
         {"metrics", to_json(s.metrics)},
         {"missing", s.missing},
         {"techniques", techniques},
         {"thresholds", to_json(s.thresholds)}};
  j["dataset"] = s.dataset ? Json{{"entropy", s.dataset->entropy},
                                  {"instances", s.dataset->instance_count},
                                  {"perplexity", s.dataset->perplexity}}
                           : Json(nullptr);
  j["decision_agreement"] = s.decision_agreement ? to_json(*s.decision_agreement) : Json(nullptr);
  j["verdict"] = s.verdict ? Json(*s.verdict) : Json(nullptr);
  j["conditions"] = s.verdict ? Json{{"entropy", s.conditions.entropy},
                                     {"explanation", s.conditions.explanation},
                                     {"kappa", s.conditions.kappa},
                                     {"perplexity", s.conditions.perplexity}}
                              : Json(nullptr);
  return j;
}

RunRecords load_run_records(const std::filesystem::path& data_dir) {
  RunRecords r;
  const auto state = data_dir / "state";
  if (std::filesystem::exists(state / "traces.jsonl")) r.traces = parse_trace_file(state / "traces.jsonl");
  if (std::filesystem::exists(state / "saliency.jsonl")) r.saliency = parse_saliency_file(state / "saliency.jsonl");
  if (std::filesystem::exists(state / "annotations.jsonl")) {
    r.annotations = parse_annotation_file(state / "annotations.jsonl");
  }
  return r;
}

}  // namespace veridical
