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

#include "veridical/service.h"

#include "veridical/crypto.h"
#include "veridical/error.h"
#include "veridical/simulation.h"

#include <httplib.h>

#include <algorithm>
#include <fstream>

#include <sys/socket.h>

namespace veridical {
namespace fs = std::filesystem;

namespace {

constexpr const char* kAutoExpert = "auto-accept";

fs::path state_file(const RunConfig& c, const char* name) { return c.data_dir / "state" / name; }

void append_line(const fs::path& path, const std::string& line) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kStoreUnavailable, "cannot append to " + path.string());
}

// A crash mid-append leaves an unterminated last line. It carries no
// committed state, so it is cut off before anything else is appended.
std::vector<Json> read_lines(const fs::path& path) {
  std::vector<Json> out;
  if (!fs::exists(path)) return out;
  std::string text = read_text_file(path);
  if (!text.empty() && text.back() != '\n') {
    text.erase(text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1);
    fs::resize_file(path, text.size());
  }
  std::size_t n = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    ++n;
    if (end > pos) out.push_back(parse_record_line(std::string_view(text).substr(pos, end - pos), n));
    pos = end + 1;
  }
  return out;
}

Json route_reason(const InstanceScore& s, const TriageConfig& t) {
  return Json{{"entropy", s.entropy},
              {"entropy_exceeds", s.entropy > t.entropy_accept_max},
              {"entropy_max", t.entropy_accept_max},
              {"perplexity", s.perplexity},
              {"perplexity_exceeds", s.perplexity > t.perplexity_accept_max},
              {"perplexity_max", t.perplexity_accept_max}};
}

}  // namespace

std::string_view to_string(TaskStatus s) { return s == TaskStatus::kJudged ? "judged" : "pending"; }

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kDuplicateInstanceId:
    case ErrorCode::kDuplicateAnnotation:
    case ErrorCode::kConflict:
    case ErrorCode::kLedgerAppendConflict: return 409;
    case ErrorCode::kStoreUnavailable: return 503;
    case ErrorCode::kChainBroken:
    case ErrorCode::kCasAlsoTampered: return 500;
    default: return 400;
  }
}

ServiceResponse error_response(const Error& e) {
  return {http_status(e.code()),
          Json{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"detail", e.detail()}}};
}

ReviewService::ReviewService(RunConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {
  config_.validate();
  key_ = load_key(config_.key_file);
  lexicon_ = config_.lexicon_file ? SynonymLexicon::load(*config_.lexicon_file) : financial_lexicon();
  layout_ = StoreLayout::under(config_.data_dir);
  cloud_ = std::make_unique<CloudStore>(layout_.cloud);
  cas_ = std::make_unique<ContentStore>(layout_.cas);
  ledger_ = std::make_unique<Ledger>(std::make_unique<FileLedgerBackend>(layout_.ledger), clock_);
  replay();
}

void ReviewService::append_event(const Json& event) {
  append_line(state_file(config_, "events.jsonl"), canonical_dump(event));
}

void ReviewService::enqueue(const std::string& sample_id, const std::string& source) {
  auto [it, inserted] = tasks_.try_emplace(sample_id);
  if (!inserted) return;
  it->second.sample_id = sample_id;
  it->second.source = source;
}

void ReviewService::replay() {
  for (const auto& j : read_lines(state_file(config_, "traces.jsonl"))) {
    auto t = trace_from_json(j);
    Instance inst{t, score_instance(t, config_.window), Route::kHumanReview, false};
    order_.push_back(t.instance_id);
    instances_.emplace(t.instance_id, std::move(inst));
  }
  for (const auto& j : read_lines(state_file(config_, "saliency.jsonl"))) {
    auto r = saliency_from_json(j);
    saliency_[r.instance_id].push_back(std::move(r));
  }

  std::set<std::string> routed;
  std::map<std::pair<std::string, std::string>, AnnotationRecord> intents;
  for (const auto& e : read_lines(state_file(config_, "events.jsonl"))) {
    const std::string type = e.at("type").get<std::string>();
    if (type == "routed") {
      auto& inst = instances_.at(e.at("instance_id").get<std::string>());
      inst.route = e.at("route").get<std::string>() == "accept" ? Route::kAccept : Route::kHumanReview;
      routed.insert(inst.trace.instance_id);
    } else if (type == "anchored") {
      instances_.at(e.at("instance_id").get<std::string>()).anchored = true;
    } else if (type == "queued") {
      enqueue(e.at("instance_id").get<std::string>(), e.at("source").get<std::string>());
    } else if (type == "judging") {
      auto a = annotation_from_json(e.at("annotation"));
      intents[{a.sample_id, a.evaluator_id}] = std::move(a);
    }
  }

  std::set<std::string> on_chain;
  for (const auto& b : ledger_->blocks()) {
    for (const auto& r : b.records) on_chain.insert(r.object_id);
  }

  // Crash recovery: a decision is only accepted once its anchor is on the
  // chain; anything short of that goes to a human.
  for (const auto& id : order_) {
    auto& inst = instances_.at(id);
    if (!routed.contains(id)) {
      append_event({{"instance_id", id}, {"route", "human_review"}, {"type", "routed"}});
      inst.route = Route::kHumanReview;
    }
    if (inst.route == Route::kAccept && !inst.anchored) {
      if (on_chain.contains(id)) {
        inst.anchored = true;
        append_event({{"instance_id", id}, {"object_id", id}, {"type", "anchored"}});
      } else {
        inst.route = Route::kHumanReview;
        append_event({{"instance_id", id}, {"route", "human_review"}, {"type", "routed"}});
      }
    }
    if (inst.route == Route::kHumanReview && !tasks_.contains(id)) {
      enqueue(id, inst.anchored ? "routing" : "anchor_incomplete");
      append_event({{"instance_id", id}, {"source", tasks_.at(id).source}, {"type", "queued"}});
    }
    if (inst.anchored) ++accepted_anchored_;
  }

  for (const auto& j : read_lines(state_file(config_, "annotations.jsonl"))) {
    auto a = annotation_from_json(j);
    intents.erase({a.sample_id, a.evaluator_id});
    commit_judgment(std::move(a), false);
  }
  // A judgment whose anchor reached the chain was committed even if the
  // process died before recording it; one that did not was never
  // acknowledged and is dropped.
  for (auto& [key, a] : intents) {
    if (on_chain.contains(judgment_object_id(a.sample_id, key_, a.evaluator_id))) {
      commit_judgment(std::move(a), true);
    }
  }
}

void ReviewService::commit_judgment(AnnotationRecord a, bool persist) {
  if (persist) append_line(state_file(config_, "annotations.jsonl"), canonical_dump(to_json(a)));
  enqueue(a.sample_id, "triage");
  auto& task = tasks_.at(a.sample_id);
  task.judged_by.insert(a.evaluator_id);
  if (task.judged_by.size() >= config_.service.raters_per_item) task.status = TaskStatus::kJudged;
  annotations_[{a.sample_id, a.evaluator_id}] = std::move(a);
}

const SaliencyRecord* ReviewService::first_saliency(const std::string& instance_id) const {
  auto it = saliency_.find(instance_id);
  return it == saliency_.end() || it->second.empty() ? nullptr : &it->second.front();
}

OnChainRecord ReviewService::anchor_accepted(const Instance& inst) {
  const ExpertContext expert{kAutoExpert, inst.trace.predicted_class, config_.service.workstation_ip};
  return store_and_anchor(build_metadata(inst.trace, inst.score, first_saliency(inst.trace.instance_id), expert, clock_()),
                   key_, *cloud_, *cas_, *ledger_);
}

ServiceResponse ReviewService::post_decisions(const Json& body) {
  try {
    const bool batch = body.is_array();
    std::vector<DecisionTrace> traces;
    std::set<std::string> seen;
    for (const auto& j : batch ? body : Json::array({body})) {
      auto t = trace_from_json(j);
      validate(t);
      if (!seen.insert(t.instance_id).second) {
        throw Error(ErrorCode::kDuplicateInstanceId, t.instance_id + " repeated in request");
      }
      if (!config_.labels.contains(t.predicted_class)) {
        throw Error(ErrorCode::kMalformedRecord, "predicted_class outside label set: " + t.predicted_class);
      }
      traces.push_back(std::move(t));
    }
    if (traces.empty()) throw Error(ErrorCode::kEmptyInput, "no traces in request");

    std::lock_guard lock(mu_);
    for (const auto& t : traces) {
      if (instances_.contains(t.instance_id)) throw Error(ErrorCode::kDuplicateInstanceId, t.instance_id);
    }
    std::vector<Instance*> accepted;
    for (auto& t : traces) {
      append_line(state_file(config_, "traces.jsonl"), canonical_dump(to_json(t)));
      Instance inst{t, score_instance(t, config_.window), Route::kHumanReview, false};
      inst.route = route_instance(inst.score, config_.triage);
      const std::string id = t.instance_id;
      order_.push_back(id);
      auto& stored = instances_.emplace(id, std::move(inst)).first->second;
      append_event({{"instance_id", id},
                    {"route", std::string(to_string(stored.route))},
                    {"type", "routed"}});
      if (stored.route == Route::kAccept) {
        accepted.push_back(&stored);
      } else {
        enqueue(id, "routing");
        append_event({{"instance_id", id}, {"source", "routing"}, {"type", "queued"}});
      }
    }
    std::map<std::string, OnChainRecord> records;
    try {
      for (auto* inst : accepted) records.emplace(inst->trace.instance_id, anchor_accepted(*inst));
      ledger_->flush();
    } catch (const Error&) {
      // Unanchored cases are never accepted; hand them to a human.
      for (auto* inst : accepted) {
        const std::string& id = inst->trace.instance_id;
        inst->route = Route::kHumanReview;
        enqueue(id, "anchor_incomplete");
        append_event({{"instance_id", id}, {"route", "human_review"}, {"type", "routed"}});
        append_event({{"instance_id", id}, {"source", "anchor_incomplete"}, {"type", "queued"}});
      }
      throw;
    }
    for (auto* inst : accepted) {
      inst->anchored = true;
      ++accepted_anchored_;
      append_event({{"instance_id", inst->trace.instance_id}, {"object_id", inst->trace.instance_id},
                    {"type", "anchored"}});
    }
    Json results = Json::array();
    for (const auto& t : traces) {
      const auto& inst = instances_.at(t.instance_id);
      auto rec = records.find(t.instance_id);
      results.push_back({{"entropy", inst.score.entropy},
                         {"instance_id", t.instance_id},
                         {"perplexity", inst.score.perplexity},
                         {"reason", route_reason(inst.score, config_.triage)},
                         {"record", rec == records.end() ? Json(nullptr) : to_json(rec->second)},
                         {"route", std::string(to_string(inst.route))}});
    }
    return {201, batch ? Json{{"results", results}} : results[0]};
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(ErrorCode::kMalformedRecord, e.what()));
  }
}

ServiceResponse ReviewService::post_saliency(const Json& body) {
  try {
    std::vector<SaliencyRecord> recs;
    for (const auto& j : body.is_array() ? body : Json::array({body})) {
      auto r = saliency_from_json(j);
      validate(r);
      recs.push_back(std::move(r));
    }
    std::lock_guard lock(mu_);
    for (const auto& r : recs) {
      if (!instances_.contains(r.instance_id)) throw Error(ErrorCode::kNotFound, "unknown instance " + r.instance_id);
      for (const auto& existing : saliency_[r.instance_id]) {
        if (existing.technique_id == r.technique_id) {
          throw Error(ErrorCode::kConflict, r.instance_id + "/" + r.technique_id + " already recorded");
        }
      }
    }
    for (auto& r : recs) {
      append_line(state_file(config_, "saliency.jsonl"), canonical_dump(to_json(r)));
      saliency_[r.instance_id].push_back(std::move(r));
    }
    return {201, Json{{"stored", recs.size()}}};
  } catch (const Error& e) {
    return error_response(e);
  }
}

Json ReviewService::task_json(const ReviewTask& task) const {
  const auto& inst = instances_.at(task.sample_id);
  Json saliency = Json::array();
  if (auto it = saliency_.find(task.sample_id); it != saliency_.end()) {
    for (const auto& r : it->second) saliency.push_back(to_json(r));
  }
  return Json{{"judged_by", task.judged_by},
              {"reason", route_reason(inst.score, config_.triage)},
              {"sample_id", task.sample_id},
              {"saliency", saliency},
              {"source", task.source},
              {"status", std::string(to_string(task.status))},
              {"trace", to_json(inst.trace)}};
}

ServiceResponse ReviewService::get_queue(const std::optional<std::string>& evaluator) const {
  std::lock_guard lock(mu_);
  std::vector<const ReviewTask*> open;
  for (const auto& [id, task] : tasks_) {
    if (task.status != TaskStatus::kPending) continue;
    if (evaluator && task.judged_by.contains(*evaluator)) continue;
    open.push_back(&task);
  }
  std::stable_sort(open.begin(), open.end(), [&](const ReviewTask* a, const ReviewTask* b) {
    return instances_.at(a->sample_id).score.entropy > instances_.at(b->sample_id).score.entropy;
  });
  Json tasks = Json::array();
  for (const auto* t : open) tasks.push_back(task_json(*t));
  return {200, Json{{"count", tasks.size()}, {"tasks", tasks}}};
}

ServiceResponse ReviewService::post_judgment(const std::string& sample_id, const Json& body,
                                             const std::string& remote_ip) {
  try {
    if (!body.is_object()) throw Error(ErrorCode::kMalformedRecord, "judgment must be an object");
    Json record = body;
    std::string final_decision;
    std::string ip = remote_ip;
    if (auto it = record.find("expert_final_decision"); it != record.end()) {
      final_decision = it->get<std::string>();
      record.erase(it);
    }
    if (auto it = record.find("workstation_ip"); it != record.end()) {
      ip = it->get<std::string>();
      record.erase(it);
    }
    if (!record.contains("sample_id")) record["sample_id"] = sample_id;
    if (record["sample_id"] != sample_id) throw Error(ErrorCode::kMalformedRecord, "sample_id does not match path");
    if (!record.contains("timestamp")) record["timestamp"] = clock_().to_string();
    auto a = annotation_from_json(record);

    std::lock_guard lock(mu_);
    auto task = tasks_.find(sample_id);
    if (task == tasks_.end()) throw Error(ErrorCode::kNotFound, "no review task for " + sample_id);
    if (task->second.judged_by.contains(a.evaluator_id)) {
      throw Error(ErrorCode::kConflict, a.evaluator_id + " already judged " + sample_id);
    }
    if (task->second.status == TaskStatus::kJudged) throw Error(ErrorCode::kConflict, sample_id + " is closed");
    const auto& inst = instances_.at(sample_id);
    if (final_decision.empty()) {
      if (a.decision_judgment == Judgment::kAgree) {
        final_decision = inst.trace.predicted_class;
      } else if (config_.labels.size() == 2) {
        for (const auto& l : config_.labels) {
          if (l != inst.trace.predicted_class) final_decision = l;
        }
      } else {
        throw Error(ErrorCode::kMalformedRecord, "expert_final_decision required for a disagreement");
      }
    }
    if (!config_.labels.contains(final_decision)) {
      throw Error(ErrorCode::kMalformedRecord, "expert_final_decision outside label set: " + final_decision);
    }
    const ExpertContext expert{a.evaluator_id, final_decision, ip};
    const auto metadata = build_metadata(inst.trace, inst.score, first_saliency(sample_id), expert, a.timestamp);
    const std::string object_id = judgment_object_id(sample_id, key_, a.evaluator_id);

    append_event({{"annotation", to_json(a)},
                  {"expert_final_decision", final_decision},
                  {"type", "judging"},
                  {"workstation_ip", ip}});
    auto rec = store_and_anchor(metadata, key_, *cloud_, *cas_, *ledger_, object_id);
    ledger_->flush();
    commit_judgment(a, true);
    return {201, Json{{"record", to_json(rec)},
                      {"sample_id", sample_id},
                      {"status", std::string(to_string(task->second.status))}}};
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(ErrorCode::kMalformedRecord, e.what()));
  }
}

std::vector<InstanceScore> ReviewService::all_scores() const {
  std::vector<InstanceScore> out;
  out.reserve(order_.size());
  for (const auto& id : order_) out.push_back(instances_.at(id).score);
  return out;
}

std::vector<AnnotationRecord> ReviewService::all_annotations() const {
  std::vector<AnnotationRecord> out;
  for (const auto& [_, a] : annotations_) out.push_back(a);
  return out;
}

GateSnapshot ReviewService::snapshot() const {
  std::vector<SaliencyRecord> saliency;
  for (const auto& [_, recs] : saliency_) saliency.insert(saliency.end(), recs.begin(), recs.end());
  return compute_gate_snapshot(all_scores(), all_annotations(), saliency, lexicon_, config_.gate, config_.beta1,
                               config_.beta2, config_.service.raters_per_item);
}

ServiceResponse ReviewService::get_gate_metrics() const {
  try {
    std::lock_guard lock(mu_);
    Json j = to_json(snapshot());
    GateHistory history(config_.data_dir / "gate");
    Json iterations = Json::array();
    for (const auto& r : history.load(config_.model_id)) iterations.push_back(to_json(r));
    j["history"] = iterations;
    j["model_id"] = config_.model_id;
    return {200, j};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ServiceResponse ReviewService::post_triage_select(const Json& body) {
  try {
    TriageConfig triage = config_.triage;
    std::size_t target = config_.sample_target;
    if (body.is_object()) {
      if (body.contains("target")) target = body.at("target").get<std::size_t>();
      if (body.contains("seed")) triage.seed = body.at("seed").get<std::uint64_t>();
    }
    std::lock_guard lock(mu_);
    const auto scores = all_scores();
    const auto assignment = assign_regions(scores, triage);
    const auto result = select_samples(assignment, target, triage);
    Json selected = Json::array();
    std::size_t created = 0;
    for (const auto& [id, region] : result.selected) {
      selected.push_back({{"instance_id", id}, {"region", std::string(to_string(region))}});
      if (!tasks_.contains(id)) {
        enqueue(id, "triage");
        append_event({{"instance_id", id}, {"source", "triage"}, {"type", "queued"}});
        ++created;
      }
    }
    return {200, Json{{"new_tasks", created},
                      {"ppl_threshold", assignment.ppl_threshold},
                      {"region_counts",
                       {{"HC", result.region_counts[0]}, {"LC", result.region_counts[2]}, {"MC", result.region_counts[1]}}},
                      {"selected", selected}}};
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(ErrorCode::kMalformedRecord, e.what()));
  }
}

ServiceResponse ReviewService::post_audit_run(const Json& body) {
  try {
    std::lock_guard lock(mu_);
    ledger_->flush();
    AuditOptions o;
    const Timestamp now = clock_();
    std::string stamp = now.to_string();
    stamp.erase(std::remove_if(stamp.begin(), stamp.end(), [](char c) { return c == '-' || c == ':' || c == '.'; }),
                stamp.end());
    o.run_id = "audit-" + stamp + "-" + std::to_string(++audit_seq_);
    o.key = key_;
    o.quarantine_dir = config_.data_dir / "quarantine";
    o.clock = [now] { return now; };
    o.recover = !(body.is_object() && body.value("recover", true) == false);
    const auto report = audit_sweep(*ledger_, *cloud_, *cas_, o);
    const Json j = to_json(report);
    write_text_file(config_.data_dir / "audit" / (o.run_id + ".json"), canonical_dump(j) + "\n");
    return {201, j};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ServiceResponse ReviewService::get_audit_report(const std::string& run_id) const {
  try {
    if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id[0] == '.') {
      throw Error(ErrorCode::kNotFound, "no report " + run_id);
    }
    const fs::path p = config_.data_dir / "audit" / (run_id + ".json");
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::kNotFound, "no report " + run_id);
    return {200, Json::parse(read_text_file(p))};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ServiceResponse ReviewService::post_tamper(const Json& body) {
  if (!config_.service.test_mode) return error_response(Error(ErrorCode::kNotFound, "no such endpoint"));
  try {
    const double rate = body.is_object() ? body.value("rate", 0.1) : 0.1;
    const std::uint64_t seed = body.is_object() ? body.value("seed", std::uint64_t{0}) : 0;
    std::lock_guard lock(mu_);
    return {200, to_json(tamper_inject(*cloud_, *cas_, rate, seed))};
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(ErrorCode::kMalformedRecord, e.what()));
  }
}

std::size_t ReviewService::accepted_count() const {
  std::lock_guard lock(mu_);
  return accepted_anchored_;
}

std::size_t ReviewService::judgment_count() const {
  std::lock_guard lock(mu_);
  return annotations_.size();
}

HttpServer::HttpServer(ReviewService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  // The library default adds SO_REUSEPORT, which lets a second instance
  // silently share the port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto& s = *server_;
  const std::string token = service_.config().service.bearer_token;
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(canonical_dump(r.body), "application/json");
  };
  auto parse_body = [](const httplib::Request& req) -> std::optional<Json> {
    if (req.body.empty()) return Json::object();
    try {
      return Json::parse(req.body);
    } catch (const Json::exception&) {
      return std::nullopt;
    }
  };
  auto with_body = [=](auto handler) {
    return [=](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req);
      if (!body) return reply(res, error_response(Error(ErrorCode::kMalformedRecord, "request body is not JSON")));
      reply(res, handler(req, *body));
    };
  };

  s.set_pre_routing_handler([=](const httplib::Request& req, httplib::Response& res) {
    if (token.empty() || req.get_header_value("Authorization") == "Bearer " + token) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    reply(res, {401, Json{{"code", "Unauthorized"}, {"detail", "missing or wrong bearer token"},
                          {"message", "Unauthorized"}}});
    return httplib::Server::HandlerResponse::Handled;
  });
  s.set_exception_handler([=](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      reply(res, error_response(e));
    } catch (const std::exception& e) {
      reply(res, {500, Json{{"code", "Internal"}, {"detail", e.what()}, {"message", "internal error"}}});
    }
  });
  s.set_error_handler([=](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      reply(res, error_response(Error(ErrorCode::kNotFound, "no such endpoint")));
    }
  });

  s.Post("/v1/decisions", with_body([this](const httplib::Request&, const Json& b) {
           return service_.post_decisions(b);
         }));
  s.Post("/v1/saliency", with_body([this](const httplib::Request&, const Json& b) {
           return service_.post_saliency(b);
         }));
  s.Get("/v1/review/queue", [=, this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> evaluator;
    if (req.has_param("evaluator")) evaluator = req.get_param_value("evaluator");
    reply(res, service_.get_queue(evaluator));
  });
  s.Post(R"(/v1/review/([^/]+)/judgment)", with_body([this](const httplib::Request& req, const Json& b) {
           return service_.post_judgment(req.matches[1], b, req.remote_addr);
         }));
  s.Get("/v1/metrics/gate", [=, this](const httplib::Request&, httplib::Response& res) {
    reply(res, service_.get_gate_metrics());
  });
  s.Post("/v1/triage/select", with_body([this](const httplib::Request&, const Json& b) {
           return service_.post_triage_select(b);
         }));
  s.Post("/v1/audit/run", with_body([this](const httplib::Request&, const Json& b) {
           return service_.post_audit_run(b);
         }));
  s.Get(R"(/v1/audit/reports/([^/]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_.get_audit_report(req.matches[1]));
  });
  s.Post("/v1/test/tamper", with_body([this](const httplib::Request&, const Json& b) {
           return service_.post_tamper(b);
         }));
}

int HttpServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ <= 0) throw Error(ErrorCode::kBindFailure, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpServer::run(const std::string& host, int port) {
  start(host, port);
  thread_.join();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace veridical
