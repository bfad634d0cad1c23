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

#include "veridical/provenance.h"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace veridical {

struct AuditFinding {
  std::string object_id;
  std::string instance_id;
  RecordType record_type = RecordType::kDecisionEvent;
  std::string h_x;
  std::string h_prime_x;
  bool tampered = false;
  bool cloud_match = false;
  bool cas_match = false;
  bool recovered = false;
  bool escalated = false;  // both copies damaged
  Timestamp checked_at;
};

struct AuditReport {
  std::string run_id;
  std::vector<AuditFinding> findings;  // ordered by object id
  double tamper_rate_observed = 0.0;
  double wall_time_ms = 0.0;
  std::size_t files_checked = 0;
  std::size_t tampered_count = 0;
  std::size_t recovered_count = 0;
};

struct AuditOptions {
  std::string run_id = "audit";
  // Hash workers; 0 means hardware concurrency.
  std::size_t workers = 0;
  bool recover = true;
  std::string key;  // needed to rebuild anonymized twins
  std::vector<RedactionRule> rules = default_redaction_rules();
  std::filesystem::path quarantine_dir;
  Clock clock = system_clock();
};

// Rehashes every anchored object against the chain. Errors: kChainBroken.
AuditReport audit_sweep(const Ledger& ledger, const CloudStore& cloud, const ContentStore& cas,
                        const AuditOptions& options);

// Restores the intact copy of a damaged object into the quarantine
// directory, next to a marker naming the compromised one. Live stores are
// not modified. Returns whether the restored copy rehashes to its anchor.
// Errors: kRejectedPrecondition (not tampered), kCasAlsoTampered.
bool recover(AuditFinding& finding, const CloudStore& cloud, const ContentStore& cas, const AuditOptions& options);

Json to_json(const AuditFinding& f);
Json to_json(const AuditReport& r);

struct TamperedObject {
  std::string medium;  // "cloud" or "cas"
  std::string id;      // cloud key or CAS digest
  std::uint64_t offset = 0;
  int original_byte = -1;  // -1: object was empty and a byte was appended

  bool operator==(const TamperedObject&) const = default;
};

struct TamperManifest {
  std::size_t objects_total = 0;
  std::vector<TamperedObject> altered;
};

// Flips one byte in each of ceil(rate * n) objects drawn uniformly from both
// stores. Errors: kInvalidConfig (rate outside [0, 0.5]), kEmptyStore.
TamperManifest tamper_inject(CloudStore& cloud, ContentStore& cas, double rate, std::uint64_t seed);
// Puts every altered byte back.
void undo_tamper(const TamperManifest& manifest, CloudStore& cloud, ContentStore& cas);

Json to_json(const TamperManifest& m);

// Damaged objects named by a report: cloud keys and CAS digests, deduplicated.
std::size_t detected_objects(const AuditReport& report);

// Sweep findings against an injection manifest, per damaged object.
struct DetectionScore {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};
DetectionScore score_detection(const AuditReport& report, const TamperManifest& manifest);

struct BenchRow {
  double rate = 0.0;
  double mean_ms = 0.0;
  std::size_t detected = 0;
  std::size_t injected = 0;
  // Worst case over repetitions.
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::vector<double> samples_ms;
};

struct BenchOptions {
  std::vector<double> rates;  // fractions, ascending
  std::size_t n_files = 5000;
  std::size_t repetitions = 5;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::filesystem::path work_dir;
};

// One populated store set per run; each (rep, rate) injects into it, sweeps
// with recovery, then undoes the damage. kInvalidConfig if rates are not
// ascending.
std::vector<BenchRow> audit_benchmark(const BenchOptions& options);

// rate_pct,mean_ms,detected,injected
std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace veridical
