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

// veridical: command-line front end over the library and the HTTP service.

#include "veridical/audit_engine.h"
#include "veridical/crypto.h"
#include "veridical/pipeline.h"
#include "veridical/run_config.h"
#include "veridical/service.h"
#include "veridical/simulation.h"
#include "veridical/triage.h"

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace veridical;

namespace {

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

void print_lines(const std::vector<Json>& rows) {
  for (const auto& r : rows) std::cout << canonical_dump(r) << '\n';
}

// --out given: write the file and stay quiet; otherwise stdout.
void emit(const Json& j, const std::string& out) {
  if (out.empty()) return print(j);
  write_text_file(out, j.dump(2) + "\n");
}

void emit_lines(const std::vector<Json>& rows, const std::string& out) {
  if (out.empty()) return print_lines(rows);
  std::string text;
  for (const auto& r : rows) text += canonical_dump(r) + "\n";
  write_text_file(out, text);
}

// Inputs shared by the gate/stability verbs: either a config (whose run
// directory holds state/*.jsonl) or explicit files.
struct RunInputs {
  std::string config;
  std::string traces;
  std::string annotations;
  std::string saliency;
  std::string lexicon;
  std::string thresholds;
  std::size_t raters = 3;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Run config; reads the run directory's state files");
    app->add_option("--traces", traces, "Decision traces (JSONL)");
    app->add_option("--annotations", annotations, "Expert annotations (JSONL)");
    app->add_option("--saliency", saliency, "Saliency records (JSONL)");
    app->add_option("--lexicon", lexicon, "Synonym lexicon (JSON)");
    app->add_option("--thresholds", thresholds, "Gate thresholds file");
    app->add_option("--raters", raters, "Raters per judged sample");
  }
};

struct LoadedRun {
  RunRecords records;
  SynonymLexicon lexicon = financial_lexicon();
  GateThresholds thresholds;
  WindowConfig window;
  double beta1 = 0.5;
  double beta2 = 0.5;
  std::size_t raters = 3;
  std::optional<RunConfig> config;
};

LoadedRun load_inputs(const RunInputs& in) {
  LoadedRun run;
  run.raters = in.raters;
  if (!in.config.empty()) {
    run.config = load_run_config(in.config);
    run.records = load_run_records(run.config->data_dir);
    if (run.config->lexicon_file) run.lexicon = SynonymLexicon::load(*run.config->lexicon_file);
    run.thresholds = run.config->gate;
    run.window = run.config->window;
    run.beta1 = run.config->beta1;
    run.beta2 = run.config->beta2;
    run.raters = run.config->service.raters_per_item;
  }
  if (!in.traces.empty()) run.records.traces = parse_trace_file(in.traces);
  if (!in.annotations.empty()) run.records.annotations = parse_annotation_file(in.annotations);
  if (!in.saliency.empty()) run.records.saliency = parse_saliency_file(in.saliency);
  if (!in.lexicon.empty()) run.lexicon = SynonymLexicon::load(in.lexicon);
  if (!in.thresholds.empty()) run.thresholds = load_thresholds(in.thresholds);
  return run;
}

GateSnapshot snapshot_of(const LoadedRun& run) {
  const auto scores = score_traces(run.records.traces, run.window);
  return compute_gate_snapshot(scores, run.records.annotations, run.records.saliency, run.lexicon, run.thresholds,
                               run.beta1, run.beta2, run.raters);
}

std::vector<InstanceScore> scores_from(const std::string& scores_file, const std::string& traces_file,
                                       const WindowConfig& window) {
  if (!scores_file.empty()) return parse_score_file(scores_file);
  if (!traces_file.empty()) return score_traces(parse_trace_file(traces_file), window);
  throw Error(ErrorCode::kEmptyInput, "give --scores or --traces");
}

// Where the provenance stores live: --config, or --data-dir plus --key.
struct StoreInputs {
  std::string config;
  std::string data_dir;
  std::string key;

  void add(CLI::App* app, bool need_key = true) {
    app->add_option("--config", config, "Run config");
    app->add_option("--data-dir", data_dir, "Run directory holding cloud/, cas/ and ledger/");
    if (need_key) app->add_option("--key", key, "Anonymization key file");
  }

  fs::path dir() const {
    if (!config.empty()) return load_run_config(config).data_dir;
    if (const char* env = std::getenv("VERIDICAL_DATA_DIR"); data_dir.empty() && env && *env) return env;
    if (data_dir.empty()) throw Error(ErrorCode::kConfigInvalid, "give --config or --data-dir");
    return data_dir;
  }
  std::string key_bytes() const {
    if (!config.empty()) return load_key(load_run_config(config).key_file);
    if (key.empty()) throw Error(ErrorCode::kConfigInvalid, "give --key or --config");
    return load_key(key);
  }
};

struct Stores {
  StoreLayout layout;
  CloudStore cloud;
  ContentStore cas;
  Ledger ledger;
  explicit Stores(const fs::path& dir)
      : layout(StoreLayout::under(dir)),
        cloud(layout.cloud),
        cas(layout.cas),
        ledger(std::make_unique<FileLedgerBackend>(layout.ledger)) {}
};

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item) / 100.0);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "bad rate '" + item + "'");
    }
  }
  return out;
}

Json quality_json(const QualityReport& q) {
  return {{"f1", q.f1}, {"fn", q.fn}, {"fp", q.fp}, {"mcc", q.mcc}, {"precision", q.precision},
          {"recall", q.recall}, {"tn", q.tn}, {"tp", q.tp}};
}

std::string random_key_hex() {
  std::random_device rd;
  std::string raw;
  for (int i = 0; i < 32; ++i) raw.push_back(static_cast<char>(rd() & 0xff));
  return sha256_hex(raw);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"veridical: uncertainty, agreement, stability, gating and provenance for LLM decisions"};
  app.require_subcommand(1);

  // score
  auto* score = app.add_subcommand("score", "Entropy and perplexity per trace, plus dataset aggregates");
  std::string score_traces_file, score_labels, score_out, score_positive = "fund";
  WindowConfig window;
  bool score_summary = false;
  score->add_option("--traces", score_traces_file, "Decision traces (JSONL)")->required();
  score->add_option("--window", window.window, "Perplexity window in tokens");
  score->add_option("--stride", window.stride, "Perplexity stride in tokens");
  score->add_option("--out", score_out, "Write per-instance scores here instead of stdout");
  score->add_flag("--summary", score_summary, "Print only the dataset summary");
  score->add_option("--labels", score_labels, "Ground-truth labels (JSONL) for the confusion matrix");
  score->add_option("--positive", score_positive, "Positive class for precision/recall");
  score->callback([&] {
    const auto traces = parse_trace_file(score_traces_file);
    const auto scores = score_traces(traces, window);
    if (!score_out.empty()) write_jsonl<InstanceScore>(score_out, scores);
    if (!score_summary && score_out.empty()) {
      std::vector<Json> rows;
      for (const auto& s : scores) rows.push_back(to_json(s));
      print_lines(rows);
      return;
    }
    const auto d = dataset_scores(scores);
    Json j{{"dataset", {{"entropy", d.entropy}, {"instances", d.instance_count}, {"perplexity", d.perplexity}}}};
    if (!score_labels.empty()) j["quality"] = quality_json(quality_report(traces, parse_label_file(score_labels), score_positive));
    print(j);
  });

  // triage
  auto* triage = app.add_subcommand("triage", "Region assignment and quota sampling for the next review cycle");
  std::string tr_scores, tr_traces, tr_config, tr_out;
  std::optional<std::size_t> tr_target;
  std::optional<std::uint64_t> tr_seed;
  triage->add_option("--scores", tr_scores, "Instance scores (JSONL)");
  triage->add_option("--traces", tr_traces, "Decision traces (JSONL), scored on the fly");
  triage->add_option("--config", tr_config, "Run config for quotas and defaults");
  triage->add_option("--target", tr_target, "Samples to select (default 70)");
  triage->add_option("--seed", tr_seed, "Sampling seed");
  triage->add_option("--out", tr_out, "Also write the selection as JSONL");
  triage->callback([&] {
    RunConfig cfg;
    if (!tr_config.empty()) cfg = load_run_config(tr_config);
    if (tr_seed) cfg.triage.seed = *tr_seed;
    cfg.triage.validate();
    const auto scores = scores_from(tr_scores, tr_traces, cfg.window);
    const auto assignment = assign_regions(scores, cfg.triage);
    const auto result = select_samples(assignment, tr_target.value_or(cfg.sample_target), cfg.triage);
    Json selected = Json::array();
    for (const auto& [id, region] : result.selected) {
      selected.push_back({{"instance_id", id}, {"region", std::string(to_string(region))}});
    }
    if (!tr_out.empty()) emit_lines(selected.get<std::vector<Json>>(), tr_out);
    std::array<std::size_t, 3> population{};
    for (const auto& [_, r] : assignment.regions) ++population[static_cast<int>(r)];
    print({{"population", {{"HC", population[0]}, {"LC", population[2]}, {"MC", population[1]}}},
           {"ppl_threshold", assignment.ppl_threshold},
           {"selected_counts",
            {{"HC", result.region_counts[0]}, {"LC", result.region_counts[2]}, {"MC", result.region_counts[1]}}},
           {"selected", selected}});
  });

  // route
  auto* route = app.add_subcommand("route", "Accept or send to human review by entropy/perplexity thresholds");
  std::string rt_scores, rt_traces, rt_out;
  TriageConfig rt_cfg;
  route->add_option("--scores", rt_scores, "Instance scores (JSONL)");
  route->add_option("--traces", rt_traces, "Decision traces (JSONL)");
  route->add_option("--entropy-max", rt_cfg.entropy_accept_max, "Accept at or below this entropy");
  route->add_option("--perplexity-max", rt_cfg.perplexity_accept_max, "Accept at or below this perplexity");
  route->add_option("--out", rt_out, "Write routing JSONL here instead of stdout");
  route->callback([&] {
    std::vector<Json> rows;
    for (const auto& s : scores_from(rt_scores, rt_traces, {})) {
      rows.push_back({{"entropy", s.entropy},
                      {"instance_id", s.instance_id},
                      {"perplexity", s.perplexity},
                      {"route", std::string(to_string(route_instance(s, rt_cfg)))}});
    }
    emit_lines(rows, rt_out);
  });

  // kappa
  auto* kappa = app.add_subcommand("kappa", "Fleiss' kappa over expert annotations");
  std::string kp_annotations, kp_target = "all", kp_group, kp_out;
  kappa->add_option("--annotations", kp_annotations, "Expert annotations (JSONL)")->required();
  kappa->add_option("--target", kp_target, "decision, explanation:<technique> or all");
  kappa->add_option("--group-by", kp_group, "Also report per group; only 'iteration' is supported")
      ->check(CLI::IsMember({"iteration"}));
  kappa->add_option("--out", kp_out, "Write the agreement JSON here instead of stdout");
  kappa->callback([&] {
    const auto ann = parse_annotation_file(kp_annotations);
    std::map<std::string, std::vector<AnnotationRecord>> groups{{"all", ann}};
    if (!kp_group.empty()) {
      for (const auto& a : ann) groups[a.iteration ? std::to_string(*a.iteration) : "none"].push_back(a);
    }
    Json out = Json::object();
    for (const auto& [name, rows] : groups) {
      std::vector<RatingTarget> targets;
      if (kp_target == "all") {
        targets.push_back(RatingTarget::decision());
        std::set<std::string> techniques;
        for (const auto& a : rows) {
          for (const auto& [t, _] : a.explanation_quality) techniques.insert(t);
        }
        for (const auto& t : techniques) targets.push_back(RatingTarget::explanation(t));
      } else {
        targets.push_back(RatingTarget::parse(kp_target));
      }
      Json g = Json::object();
      for (const auto& t : targets) g[t.to_string()] = to_json(fleiss_kappa(build_matrix(rows, t)));
      out[name] = g;
    }
    emit(out, kp_out);
  });

  // stability
  auto* stability = app.add_subcommand("stability", "Explanation stability and combined E_g per technique");
  RunInputs st_in;
  st_in.add(stability);
  double st_beta1 = -1, st_beta2 = -1;
  std::string st_agreement, st_out;
  stability->add_option("--beta1,--beta", st_beta1, "Weight on agreement");
  stability->add_option("--beta2", st_beta2, "Weight on stability");
  stability->add_option("--agreement", st_agreement, "Output of `kappa`; its explanation:<technique> entries are used");
  stability->add_option("--out", st_out, "Write the report here instead of stdout");
  stability->callback([&] {
    auto run = load_inputs(st_in);
    if (st_beta1 >= 0) run.beta1 = st_beta1;
    if (st_beta2 >= 0) run.beta2 = st_beta2;
    if (st_beta1 >= 0 && st_beta2 < 0) run.beta2 = 1.0 - st_beta1;
    if (st_beta2 >= 0 && st_beta1 < 0) run.beta1 = 1.0 - st_beta2;
    if (run.records.saliency.empty()) throw Error(ErrorCode::kEmptySaliency, "no saliency records");
    std::map<std::string, double> kappas;
    if (!st_agreement.empty()) {
      const Json doc = Json::parse(read_text_file(st_agreement));
      const Json& groups = doc.contains("all") ? doc.at("all") : doc;
      const std::string prefix = "explanation:";
      for (const auto& [name, score] : groups.items()) {
        if (name.rfind(prefix, 0) == 0) kappas[name.substr(prefix.size())] = score.at("clamped_kappa").get<double>();
      }
      if (kappas.empty()) throw Error(ErrorCode::kMissingMetric, "no explanation agreement in " + st_agreement);
    } else if (!run.records.annotations.empty()) {
      std::set<std::string> techniques;
      for (const auto& a : run.records.annotations) {
        for (const auto& [t, _] : a.explanation_quality) techniques.insert(t);
      }
      for (const auto& t : techniques) {
        kappas[t] = fleiss_kappa(build_matrix(run.records.annotations, RatingTarget::explanation(t))).clamped_kappa;
      }
    } else {
      for (const auto& r : run.records.saliency) kappas[r.technique_id] = 0.0;
    }
    const auto report = build_stability_report(run.records.saliency, run.lexicon, kappas, run.beta1, run.beta2);
    Json j = to_json(report);
    j["ranking"] = rank_techniques(report);
    emit(j, st_out);
  });

  // gate
  auto* gate = app.add_subcommand("gate", "Deployment gate and retraining loop");
  gate->require_subcommand(1);
  auto* gate_eval = gate->add_subcommand("evaluate", "Compute every gate metric and the verdict");
  RunInputs gate_in;
  gate_in.add(gate_eval);
  std::string ge_metrics, ge_out;
  gate_eval->add_option("--metrics", ge_metrics, "Precomputed metrics JSON (kappa_y, best_e_g, dataset_entropy, dataset_perplexity)");
  gate_eval->add_option("--out", ge_out, "Write the result here instead of stdout");
  gate_eval->callback([&] {
    if (ge_metrics.empty()) return emit(to_json(snapshot_of(load_inputs(gate_in))), ge_out);
    const GateThresholds th = load_inputs(gate_in).thresholds;
    const GateMetrics m = metrics_from_json(Json::parse(read_text_file(ge_metrics)));
    std::vector<std::string> missing;
    if (!m.kappa_y) missing.push_back("kappa_y");
    if (!m.best_e_g) missing.push_back("best_e_g");
    if (!m.dataset_entropy) missing.push_back("dataset_entropy");
    if (!m.dataset_perplexity) missing.push_back("dataset_perplexity");
    Json j{{"metrics", to_json(m)}, {"missing", missing}, {"thresholds", to_json(th)}};
    j["verdict"] = missing.empty() ? Json(evaluate_gate(m, th)) : Json(nullptr);
    emit(j, ge_out);
  });

  auto* gate_check = gate->add_subcommand("check", "Verdict for explicit metric values");
  GateMetrics gm;
  std::string gc_thresholds;
  gate_check->add_option("--kappa", gm.kappa_y, "Clamped decision kappa");
  gate_check->add_option("--eg", gm.best_e_g, "Best technique E_g");
  gate_check->add_option("--entropy", gm.dataset_entropy, "Dataset entropy");
  gate_check->add_option("--perplexity", gm.dataset_perplexity, "Dataset perplexity");
  gate_check->add_option("--thresholds", gc_thresholds, "Gate thresholds file");
  gate_check->callback([&] {
    const GateThresholds th = gc_thresholds.empty() ? GateThresholds{} : load_thresholds(gc_thresholds);
    const auto c = gate_conditions(gm, th);
    print({{"conditions", {{"entropy", c.entropy}, {"explanation", c.explanation}, {"kappa", c.kappa},
                           {"perplexity", c.perplexity}}},
           {"pass", evaluate_gate(gm, th)},
           {"thresholds", to_json(th)}});
  });

  std::string hist_dir, hist_model;
  int hist_max = 0;
  auto history_target = [&](const LoadedRun* run) {
    fs::path dir = hist_dir;
    std::string model = hist_model;
    int max_it = hist_max;
    if (run && run->config) {
      if (dir.empty()) dir = run->config->data_dir / "gate";
      if (model.empty()) model = run->config->model_id;
      if (max_it == 0) max_it = run->config->max_iterations;
    }
    if (dir.empty() || model.empty()) throw Error(ErrorCode::kConfigInvalid, "give --config or --history-dir and --model");
    return std::tuple{dir, model, max_it == 0 ? 5 : max_it};
  };
  auto history_json = [](const std::vector<IterationRecord>& h, int max_it) {
    Json rows = Json::array();
    for (const auto& r : h) rows.push_back(to_json(r));
    return Json{{"history", rows},
                {"max_iterations", max_it},
                {"verdict", h.empty() ? Json(nullptr) : Json(std::string(to_string(advance_loop(h, max_it))))}};
  };

  auto* gate_record = gate->add_subcommand("record", "Evaluate and append the next retraining iteration");
  RunInputs rec_in;
  rec_in.add(gate_record);
  gate_record->add_option("--history-dir", hist_dir, "Directory of per-model history files");
  gate_record->add_option("--model", hist_model, "Model id");
  gate_record->add_option("--max-iterations", hist_max, "Iteration budget");
  gate_record->callback([&] {
    const auto run = load_inputs(rec_in);
    const auto snap = snapshot_of(run);
    if (!snap.verdict) {
      std::string names;
      for (const auto& m : snap.missing) names += (names.empty() ? "" : ", ") + m;
      throw Error(ErrorCode::kMissingMetric, names);
    }
    auto [dir, model, max_it] = history_target(&run);
    GateHistory history(dir);
    history.append(model, snap.metrics, run.thresholds, Timestamp::now());
    print(history_json(history.load(model), max_it));
  });

  auto* gate_history = gate->add_subcommand("history", "Recorded iterations and the loop verdict");
  std::string gh_config;
  gate_history->add_option("--config", gh_config, "Run config");
  gate_history->add_option("--history-dir", hist_dir, "Directory of per-model history files");
  gate_history->add_option("--model", hist_model, "Model id");
  gate_history->add_option("--max-iterations", hist_max, "Iteration budget");
  gate_history->callback([&] {
    std::optional<LoadedRun> run;
    if (!gh_config.empty()) {
      run.emplace();
      run->config = load_run_config(gh_config);
    }
    auto [dir, model, max_it] = history_target(run ? &*run : nullptr);
    print(history_json(GateHistory(dir).load(model), max_it));
  });

  // anchor
  auto* anchor = app.add_subcommand("anchor", "Store anonymized metadata and anchor its hashes on the ledger");
  StoreInputs an_store;
  an_store.add(anchor);
  std::string an_traces, an_saliency, an_expert = "auto-accept", an_decision, an_ip = "127.0.0.1";
  std::string an_artifact, an_model, an_publisher = "release";
  anchor->add_option("--traces", an_traces, "Decision traces to anchor (JSONL)");
  anchor->add_option("--saliency", an_saliency, "Saliency records; the first per instance is summarized");
  std::vector<std::string> an_ids;
  anchor->add_option("--trace", an_ids, "Only these instance ids (repeatable)");
  anchor->add_option("--expert-id,--expert", an_expert, "Expert recorded on each decision");
  anchor->add_option("--decision", an_decision, "Final decision (default: the model's prediction)");
  anchor->add_option("--ip", an_ip, "Workstation IPv4 address");
  anchor->add_option("--model-artifact", an_artifact, "Anchor a model update instead of decisions");
  anchor->add_option("--model-id", an_model, "Model id for --model-artifact");
  anchor->add_option("--publisher", an_publisher, "Who published the model update");
  anchor->callback([&] {
    Stores s(an_store.dir());
    const std::string key = an_store.key_bytes();
    std::vector<Json> rows;
    if (!an_artifact.empty()) {
      if (an_model.empty()) throw Error(ErrorCode::kMissingField, "--model-id is required with --model-artifact");
      rows.push_back(to_json(
          anchor_model_update(an_model, read_text_file(an_artifact), key,
                              ExpertContext{an_publisher, "publish", an_ip}, s.cloud, s.cas, s.ledger)));
    } else {
      if (an_traces.empty()) throw Error(ErrorCode::kEmptyInput, "give --traces or --model-artifact");
      std::map<std::string, SaliencyRecord> first;
      if (!an_saliency.empty()) {
        for (auto& r : parse_saliency_file(an_saliency)) first.try_emplace(r.instance_id, std::move(r));
      }
      const std::set<std::string> only(an_ids.begin(), an_ids.end());
      std::set<std::string> seen;
      for (const auto& t : parse_trace_file(an_traces)) {
        if (!only.empty() && !only.count(t.instance_id)) continue;
        seen.insert(t.instance_id);
        auto it = first.find(t.instance_id);
        const ExpertContext expert{an_expert, an_decision.empty() ? t.predicted_class : an_decision, an_ip};
        const auto meta =
            build_metadata(t, score_instance(t), it == first.end() ? nullptr : &it->second, expert, Timestamp::now());
        rows.push_back(to_json(store_and_anchor(meta, key, s.cloud, s.cas, s.ledger)));
      }
      for (const auto& id : only) {
        if (!seen.count(id)) throw Error(ErrorCode::kNotFound, "no trace " + id + " in " + an_traces);
      }
    }
    s.ledger.flush();
    print_lines(rows);
  });

  // ledger
  auto* ledger = app.add_subcommand("ledger", "Inspect and verify the hash-chained ledger");
  ledger->require_subcommand(1);
  StoreInputs lg_store;
  auto* lg_verify = ledger->add_subcommand("verify", "Check every block hash and link");
  lg_store.add(lg_verify, false);
  int exit_code = 0;
  lg_verify->callback([&] {
    Stores s(lg_store.dir());
    const auto v = s.ledger.verify();
    print({{"blocks", s.ledger.block_count()},
           {"first_bad_index", v.ok ? Json(nullptr) : Json(*v.first_bad_index)},
           {"ok", v.ok},
           {"reason", v.reason}});
    if (!v.ok) exit_code = 1;
  });
  auto* lg_append = ledger->add_subcommand("append", "Append on-chain records (JSONL) and seal them");
  lg_store.add(lg_append, false);
  std::string lg_records;
  lg_append->add_option("--records", lg_records, "On-chain records, one JSON object per line")->required();
  lg_append->callback([&] {
    Stores s(lg_store.dir());
    std::istringstream in(read_text_file(lg_records));
    std::string line;
    std::size_t n = 0, count = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::parse_error& e) {
        throw MalformedRecord(n, e.what());
      }
      s.ledger.append(on_chain_record_from_json(j, n));
      ++count;
    }
    s.ledger.flush();
    print({{"appended", count}, {"blocks", s.ledger.block_count()}});
  });
  auto* lg_show = ledger->add_subcommand("show", "Print blocks as JSON lines");
  lg_store.add(lg_show, false);
  std::optional<std::size_t> lg_block;
  lg_show->add_option("--block", lg_block, "Only this block index");
  lg_show->callback([&] {
    Stores s(lg_store.dir());
    std::vector<Json> rows;
    for (const auto& b : s.ledger.blocks()) {
      if (!lg_block || b.index == *lg_block) rows.push_back(to_json(b));
    }
    if (lg_block && rows.empty()) throw Error(ErrorCode::kNotFound, "block " + std::to_string(*lg_block));
    print_lines(rows);
  });

  // audit
  auto* audit = app.add_subcommand("audit", "Integrity sweeps, tamper injection and the tamper-rate benchmark");
  audit->require_subcommand(1);
  StoreInputs au_store;
  auto* au_run = audit->add_subcommand("run", "Rehash every anchored object against the chain");
  au_store.add(au_run);
  std::size_t au_workers = 0;
  bool au_no_recover = false;
  std::string au_report;
  au_run->add_option("--workers", au_workers, "Hash workers (0: all cores)");
  au_run->add_option("--report", au_report, "Also write the report here");
  au_run->add_flag("--no-recover", au_no_recover, "Report only; skip quarantine recovery");
  au_run->callback([&] {
    const fs::path dir = au_store.dir();
    Stores s(dir);
    AuditOptions o;
    const std::string stamp = std::to_string(Timestamp::now().unix_ms);
    o.run_id = "audit-cli-" + stamp;
    o.workers = au_workers;
    o.recover = !au_no_recover;
    o.quarantine_dir = dir / "quarantine";
    if (o.recover) o.key = au_store.key_bytes();
    const auto report = audit_sweep(s.ledger, s.cloud, s.cas, o);
    const Json j = to_json(report);
    write_text_file(dir / "audit" / (o.run_id + ".json"), canonical_dump(j) + "\n");
    if (!au_report.empty()) write_text_file(au_report, j.dump(2) + "\n");
    print(j);
    if (report.tampered_count > 0) exit_code = 3;
  });
  auto* au_tamper = audit->add_subcommand("tamper", "Flip one byte in a share of stored objects (testing only)");
  au_store.add(au_tamper, false);
  double au_rate = 0.1;
  std::uint64_t au_seed = 0;
  bool au_test_mode = false;
  au_tamper->add_option("--rate", au_rate, "Share of objects to alter, in percent")->required();
  au_tamper->add_option("--seed", au_seed, "Selection seed");
  au_tamper->add_flag("--test-mode", au_test_mode, "Required: acknowledges the stores will be damaged");
  au_tamper->callback([&] {
    if (!au_test_mode) throw Error(ErrorCode::kRejectedPrecondition, "tamper needs --test-mode");
    Stores s(au_store.dir());
    print(to_json(tamper_inject(s.cloud, s.cas, au_rate / 100.0, au_seed)));
  });
  auto* au_bench = audit->add_subcommand("bench", "Sweep time and detection across tamper rates");
  std::string ab_rates = "2,6,10,14,18", ab_work, ab_out;
  BenchOptions bo;
  au_bench->add_option("--rates", ab_rates, "Comma-separated percentages, ascending");
  au_bench->add_option("--files", bo.n_files, "Anchored decisions to populate");
  au_bench->add_option("--reps", bo.repetitions, "Runs per rate");
  au_bench->add_option("--seed", bo.seed, "Tamper seed");
  au_bench->add_option("--workers", bo.workers, "Hash workers (0: all cores)");
  au_bench->add_option("--work-dir", ab_work, "Scratch directory (default: a temp dir)");
  au_bench->add_option("--out", ab_out, "Write the CSV here too");
  au_bench->callback([&] {
    bo.rates = parse_rates(ab_rates);
    bool temp = ab_work.empty();
    bo.work_dir = temp ? fs::temp_directory_path() / ("veridical-bench-" + random_key_hex().substr(0, 12)) : fs::path(ab_work);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<BenchRow> rows;
    try {
      rows = audit_benchmark(bo);
    } catch (...) {
      if (temp) fs::remove_all(bo.work_dir);
      throw;
    }
    if (temp) fs::remove_all(bo.work_dir);
    const std::string csv = bench_csv(rows);
    if (!ab_out.empty()) write_text_file(ab_out, csv);
    std::cout << csv;
    std::fprintf(stderr, "total %.1f ms\n", ms_since(t0));
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Time each pipeline stage on generated fixtures");
  std::size_t bn_n = 1200, bn_anchor = 500;
  std::uint64_t bn_seed = 1;
  bench->add_option("--n", bn_n, "Traces to generate");
  bench->add_option("--anchor", bn_anchor, "Decisions to anchor and audit");
  bench->add_option("--seed", bn_seed, "Fixture seed");
  bench->callback([&] {
    Json j = Json::object();
    auto t = std::chrono::steady_clock::now();
    const auto traces = generate_fixtures(bn_seed, bn_n);
    j["fixtures_ms"] = ms_since(t);
    t = std::chrono::steady_clock::now();
    const auto scores = score_traces(traces);
    dataset_scores(scores);
    j["score_ms"] = ms_since(t);
    t = std::chrono::steady_clock::now();
    TriageConfig tc;
    tc.seed = bn_seed;
    const auto sel = select_samples(assign_regions(scores, tc), std::min<std::size_t>(70, bn_n), tc);
    j["triage_ms"] = ms_since(t);
    std::vector<DecisionTrace> picked;
    std::set<std::string> ids;
    for (const auto& [id, _] : sel.selected) ids.insert(id);
    for (const auto& tr : traces) {
      if (ids.contains(tr.instance_id)) picked.push_back(tr);
    }
    AnnotationSimulation sim;
    sim.seed = bn_seed;
    const auto ann = simulate_annotations(picked, sim);
    t = std::chrono::steady_clock::now();
    fleiss_kappa(build_matrix(ann, RatingTarget::decision()));
    j["kappa_ms"] = ms_since(t);
    const auto lex = financial_lexicon();
    const auto profiles = default_technique_profiles();
    const auto sal = generate_saliency(picked, lex, profiles, bn_seed);
    t = std::chrono::steady_clock::now();
    build_stability_report(sal, lex, {{"IG", 0.5}, {"LIME", 0.5}, {"SHAP", 0.5}});
    j["stability_ms"] = ms_since(t);

    const fs::path dir = fs::temp_directory_path() / ("veridical-bench-" + random_key_hex().substr(0, 12));
    try {
      Stores s(dir);
      const std::string key = random_key_hex();
      t = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < std::min(bn_anchor, traces.size()); ++i) {
        const ExpertContext expert{"auto-accept", traces[i].predicted_class, "127.0.0.1"};
        store_and_anchor(build_metadata(traces[i], scores[i], nullptr, expert, Timestamp::now()), key, s.cloud, s.cas,
                         s.ledger);
      }
      s.ledger.flush();
      j["anchor_ms"] = ms_since(t);
      t = std::chrono::steady_clock::now();
      AuditOptions o;
      o.recover = false;
      audit_sweep(s.ledger, s.cloud, s.cas, o);
      j["audit_ms"] = ms_since(t);
    } catch (...) {
      fs::remove_all(dir);
      throw;
    }
    fs::remove_all(dir);
    print(j);
  });

  // fixtures
  auto* fixtures = app.add_subcommand("fixtures", "Write a reproducible synthetic run (traces, saliency, annotations, labels)");
  std::string fx_out;
  std::size_t fx_n = 1200, fx_judged = 70;
  std::uint64_t fx_seed = 42;
  std::optional<int> fx_iteration;
  fixtures->add_option("--out", fx_out, "Output directory")->required();
  fixtures->add_option("--n", fx_n, "Number of traces");
  fixtures->add_option("--seed", fx_seed, "Seed for every generator");
  fixtures->add_option("--judged", fx_judged, "Triage-selected samples the simulated experts rate");
  fixtures->add_option("--iteration", fx_iteration, "Iteration tag on the annotations");
  fixtures->callback([&] {
    const fs::path out = fx_out;
    fs::create_directories(out / "run");
    const auto traces = generate_fixtures(fx_seed, fx_n);
    const auto lex = financial_lexicon();
    const auto profiles = default_technique_profiles();
    const auto sal = generate_saliency(traces, lex, profiles, fx_seed);
    TriageConfig tc;
    tc.seed = fx_seed;
    const auto sel = select_samples(assign_regions(score_traces(traces), tc), fx_judged, tc);
    std::set<std::string> ids;
    for (const auto& [id, _] : sel.selected) ids.insert(id);
    std::vector<DecisionTrace> picked;
    for (const auto& t : traces) {
      if (ids.contains(t.instance_id)) picked.push_back(t);
    }
    AnnotationSimulation sim;
    sim.seed = fx_seed;
    sim.iteration = fx_iteration;
    write_jsonl<DecisionTrace>(out / "traces.jsonl", traces);
    write_jsonl<SaliencyRecord>(out / "saliency.jsonl", sal);
    write_jsonl<AnnotationRecord>(out / "annotations.jsonl", simulate_annotations(picked, sim));
    write_jsonl<GroundTruthLabel>(out / "labels.jsonl", simulate_labels(traces, fx_seed));
    write_text_file(out / "lexicon.json", lex.to_json().dump(2) + "\n");
    if (!fs::exists(out / "key.bin")) write_text_file(out / "key.bin", random_key_hex());
    if (!fs::exists(out / "veridical.conf")) {
      write_text_file(out / "veridical.conf",
                      "data_dir = run\nkey_file = key.bin\nlabels = fund, reject\n\n"
                      "[triage]\nseed = " + std::to_string(fx_seed) + "\nsample_target = " + std::to_string(fx_judged) +
                          "\n\n[stability]\nlexicon = lexicon.json\n\n[service]\nport = 8080\n");
    }
    print({{"annotations", picked.size() * sim.evaluators.size()},
           {"out", fs::absolute(out).string()},
           {"saliency", sal.size()},
           {"traces", traces.size()}});
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON review service");
  std::string sv_config, sv_bind;
  std::optional<int> sv_port;
  bool sv_test_mode = false;
  serve->add_option("--config", sv_config, "Run config")->required();
  serve->add_option("--bind", sv_bind, "Bind address");
  serve->add_option("--port", sv_port, "Port (0 picks a free one)");
  serve->add_flag("--test-mode", sv_test_mode, "Expose /v1/test/tamper");
  serve->callback([&] {
    auto cfg = load_run_config(sv_config);
    if (!sv_bind.empty()) cfg.service.bind = sv_bind;
    if (sv_port) cfg.service.port = *sv_port;
    if (sv_test_mode) cfg.service.test_mode = true;
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    ReviewService service(cfg);
    HttpServer server(service);
    const int port = server.start(cfg.service.bind, cfg.service.port);
    std::fprintf(stderr, "listening on %s:%d\n", cfg.service.bind.c_str(), port);
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << canonical_dump(Json{{"code", std::string(to_string(e.code()))}, {"message", e.detail()}}) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << canonical_dump(Json{{"code", "Internal"}, {"message", e.what()}}) << '\n';
    return 1;
  }
  return exit_code;
}
