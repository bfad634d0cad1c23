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

#include "veridical/audit_engine.h"
#include "veridical/pipeline.h"
#include "veridical/provenance.h"
#include "veridical/run_config.h"
#include "veridical/triage.h"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace veridical {

enum class TaskStatus { kPending, kJudged };
std::string_view to_string(TaskStatus s);

struct ReviewTask {
  std::string sample_id;
  std::string source;  // routing, triage or anchor_incomplete
  TaskStatus status = TaskStatus::kPending;
  std::set<std::string> judged_by;
};

struct ServiceResponse {
  int status = 200;
  Json body;
};

// All state lives in append-only files under the data dir, so a restart
// replays to the same queue, scores and judgments:
//   state/traces.jsonl, state/saliency.jsonl, state/annotations.jsonl,
//   state/events.jsonl,
//   cloud/, cas/, ledger/chain.jsonl, gate/, audit/, quarantine/.
// Every accepted decision and every judgment is anchored before the call
// returns; state changes are serialized by one mutex.
class ReviewService {
 public:
  explicit ReviewService(RunConfig config, Clock clock = system_clock());

  ServiceResponse post_decisions(const Json& body);
  ServiceResponse post_saliency(const Json& body);
  ServiceResponse get_queue(const std::optional<std::string>& evaluator) const;
  ServiceResponse post_judgment(const std::string& sample_id, const Json& body, const std::string& remote_ip);
  ServiceResponse get_gate_metrics() const;
  ServiceResponse post_triage_select(const Json& body);
  ServiceResponse post_audit_run(const Json& body);
  ServiceResponse get_audit_report(const std::string& run_id) const;
  ServiceResponse post_tamper(const Json& body);

  const RunConfig& config() const { return config_; }
  // Ledger decision events by origin, for consistency checks.
  std::size_t accepted_count() const;
  std::size_t judgment_count() const;

 private:
  struct Instance {
    DecisionTrace trace;
    InstanceScore score;
    Route route = Route::kHumanReview;
    bool anchored = false;
  };

  void replay();
  void append_event(const Json& event);
  OnChainRecord anchor_accepted(const Instance& inst);
  void enqueue(const std::string& sample_id, const std::string& source);
  void commit_judgment(AnnotationRecord a, bool persist);
  Json task_json(const ReviewTask& task) const;
  std::vector<InstanceScore> all_scores() const;
  std::vector<AnnotationRecord> all_annotations() const;
  GateSnapshot snapshot() const;
  const SaliencyRecord* first_saliency(const std::string& instance_id) const;

  RunConfig config_;
  Clock clock_;
  std::string key_;
  SynonymLexicon lexicon_;
  StoreLayout layout_;
  std::unique_ptr<CloudStore> cloud_;
  std::unique_ptr<ContentStore> cas_;
  std::unique_ptr<Ledger> ledger_;

  mutable std::mutex mu_;
  std::map<std::string, Instance> instances_;
  std::vector<std::string> order_;  // ingestion order
  std::map<std::string, std::vector<SaliencyRecord>> saliency_;
  std::map<std::string, ReviewTask> tasks_;
  std::map<std::pair<std::string, std::string>, AnnotationRecord> annotations_;
  std::size_t accepted_anchored_ = 0;
  std::size_t audit_seq_ = 0;
};

// JSON error body {code, message, detail} and HTTP status for an Error.
ServiceResponse error_response(const Error& e);
int http_status(ErrorCode code);

// HTTP/1.1 front end. start() binds (port 0 picks a free port) and serves
// on a background thread. Errors: kBindFailure.
class HttpServer {
 public:
  explicit HttpServer(ReviewService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  int start(const std::string& host, int port);
  // Blocks until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  void install_routes();

  ReviewService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace veridical
