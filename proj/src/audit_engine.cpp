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

#include "veridical/audit_engine.h"

#include "veridical/crypto.h"
#include "veridical/error.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <unistd.h>

namespace veridical {
namespace fs = std::filesystem;

namespace {

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

void write_file(const fs::path& p, std::string_view bytes) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kStoreUnavailable, "cannot write " + p.string());
}

}  // namespace

AuditReport audit_sweep(const Ledger& ledger, const CloudStore& cloud, const ContentStore& cas,
                        const AuditOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const auto chain = ledger.verify();
  if (!chain.ok) {
    throw Error(ErrorCode::kChainBroken,
                "block " + std::to_string(chain.first_bad_index.value_or(0)) + ": " + chain.reason);
  }
  // A later anchor of the same object supersedes the earlier one.
  std::map<std::string, OnChainRecord> latest;
  for (const auto& block : ledger.blocks()) {
    for (const auto& r : block.records) latest[r.object_id] = r;
  }

  AuditReport report;
  report.run_id = options.run_id;
  const Timestamp checked_at = options.clock();
  report.findings.reserve(latest.size());
  std::vector<std::string> cloud_keys;
  for (const auto& [id, r] : latest) {
    const auto h = decode_payload(r.payload);
    AuditFinding f;
    f.object_id = id;
    f.instance_id = instance_of(id);
    f.record_type = r.record_type;
    f.h_x = h.h_x;
    f.h_prime_x = h.h_prime_x;
    f.checked_at = checked_at;
    report.findings.push_back(std::move(f));
    cloud_keys.push_back(cloud_key_for(r));
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < report.findings.size(); i = next++) {
      auto& f = report.findings[i];
      f.cloud_match = sha256_file(cloud.path_of(cloud_keys[i])) == f.h_x;
      f.cas_match = sha256_file(cas.path_of(f.h_prime_x)) == f.h_prime_x;
      f.tampered = !(f.cloud_match && f.cas_match);
    }
  };
  const std::size_t n_workers = worker_count(options.workers, report.findings.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (auto& f : report.findings) {
    if (!f.tampered) continue;
    ++report.tampered_count;
    if (!options.recover) continue;
    try {
      if (recover(f, cloud, cas, options)) ++report.recovered_count;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCasAlsoTampered) throw;
    }
  }
  report.files_checked = report.findings.size();
  report.tamper_rate_observed =
      report.files_checked ? static_cast<double>(report.tampered_count) / static_cast<double>(report.files_checked) : 0.0;
  report.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return report;
}

bool recover(AuditFinding& f, const CloudStore& cloud, const ContentStore& cas, const AuditOptions& options) {
  if (!f.tampered) throw Error(ErrorCode::kRejectedPrecondition, f.object_id + " is not tampered");
  if (!f.cloud_match && !f.cas_match) {
    f.escalated = true;
    throw Error(ErrorCode::kCasAlsoTampered, f.object_id + ": cloud and CAS copies both fail their anchors");
  }
  if (options.quarantine_dir.empty()) throw Error(ErrorCode::kInvalidConfig, "no quarantine directory");
  const fs::path dir = options.quarantine_dir / options.run_id;
  const bool model = f.record_type == RecordType::kModelUpdate;
  OnChainRecord locator{f.record_type, f.object_id, {}, {}};

  std::string restored, expected, compromised, suffix;
  if (!f.cloud_match) {
    // The CAS twin is intact. For decisions it is the anonymized version,
    // so the original cloud bytes are not recoverable.
    restored = cas.get(f.h_prime_x).value_or("");
    expected = model ? f.h_x : f.h_prime_x;
    compromised = "cloud:" + cloud_key_for(locator);
    suffix = model ? ".bin" : ".anonymized.json";
  } else {
    const std::string original = cloud.get(cloud_key_for(locator)).value_or("");
    if (model) {
      restored = original;
    } else {
      if (options.key.empty()) return false;
      restored = anonymize(metadata_from_json(Json::parse(original)), options.key, options.rules).serialize();
    }
    expected = f.h_prime_x;
    compromised = "cas:" + f.h_prime_x;
    suffix = model ? ".cas.bin" : ".cas.json";
  }
  write_file(dir / (f.object_id + suffix), restored);
  const bool ok = sha256_hex(restored) == expected;
  const Json marker{{"checked_at", f.checked_at.to_string()},
                    {"compromised", compromised},
                    {"expected_hash", expected},
                    {"object_id", f.object_id},
                    {"restored_verified", ok}};
  write_file(dir / (f.object_id + ".marker.json"), canonical_dump(marker));
  f.recovered = ok;
  return ok;
}

Json to_json(const AuditFinding& f) {
  return Json{{"cas_match", f.cas_match},     {"checked_at", f.checked_at.to_string()},
              {"cloud_match", f.cloud_match}, {"escalated", f.escalated},
              {"h'_x", f.h_prime_x},          {"h_x", f.h_x},
              {"instance_id", f.instance_id}, {"object_id", f.object_id},
              {"record_type", std::string(to_string(f.record_type))},
              {"recovered", f.recovered},     {"tampered", f.tampered}};
}

Json to_json(const AuditReport& r) {
  Json findings = Json::array();
  for (const auto& f : r.findings) findings.push_back(to_json(f));
  return Json{{"files_checked", r.files_checked},
              {"findings", findings},
              {"recovered_count", r.recovered_count},
              {"run_id", r.run_id},
              {"tamper_rate_observed", r.tamper_rate_observed},
              {"tampered_count", r.tampered_count},
              {"wall_time_ms", r.wall_time_ms}};
}

TamperManifest tamper_inject(CloudStore& cloud, ContentStore& cas, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 0.5)) throw Error(ErrorCode::kInvalidConfig, "tamper rate must lie in [0, 0.5]");
  std::vector<std::pair<std::string, std::string>> objects;
  for (const char* prefix : {"decisions", "models"}) {
    for (auto& k : cloud.list(prefix)) objects.emplace_back("cloud", std::move(k));
  }
  for (auto& d : cas.list()) objects.emplace_back("cas", std::move(d));
  if (objects.empty()) throw Error(ErrorCode::kEmptyStore, "no objects to tamper with");

  TamperManifest manifest;
  manifest.objects_total = objects.size();
  const auto k = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(objects.size()) - 1e-9));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, objects.size() - 1);
    std::swap(objects[i], objects[pick(rng)]);
    const auto& [medium, id] = objects[i];
    const fs::path p = medium == "cloud" ? cloud.path_of(id) : cas.path_of(id);
    std::fstream io(p, std::ios::in | std::ios::out | std::ios::binary);
    if (!io) throw Error(ErrorCode::kStoreUnavailable, "cannot open " + p.string());
    const auto size = fs::file_size(p);
    TamperedObject t{medium, id, 0, -1};
    if (size == 0) {
      io.seekp(0);
      io.put('\x01');
    } else {
      t.offset = std::uniform_int_distribution<std::uint64_t>(0, size - 1)(rng);
      const auto mask = static_cast<char>(std::uniform_int_distribution<int>(1, 255)(rng));
      io.seekg(static_cast<std::streamoff>(t.offset));
      char c = 0;
      io.get(c);
      t.original_byte = static_cast<unsigned char>(c);
      io.seekp(static_cast<std::streamoff>(t.offset));
      io.put(static_cast<char>(c ^ mask));
    }
    io.flush();
    if (!io) throw Error(ErrorCode::kStoreUnavailable, "tamper write failed for " + p.string());
    manifest.altered.push_back(std::move(t));
  }
  std::sort(manifest.altered.begin(), manifest.altered.end(),
            [](const auto& a, const auto& b) { return std::tie(a.medium, a.id) < std::tie(b.medium, b.id); });
  return manifest;
}

void undo_tamper(const TamperManifest& manifest, CloudStore& cloud, ContentStore& cas) {
  for (const auto& t : manifest.altered) {
    const fs::path p = t.medium == "cloud" ? cloud.path_of(t.id) : cas.path_of(t.id);
    if (t.original_byte < 0) {
      fs::resize_file(p, 0);
      continue;
    }
    std::fstream io(p, std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(static_cast<std::streamoff>(t.offset));
    io.put(static_cast<char>(t.original_byte));
    io.flush();
    if (!io) throw Error(ErrorCode::kStoreUnavailable, "cannot undo tamper on " + p.string());
  }
}

Json to_json(const TamperManifest& m) {
  Json altered = Json::array();
  for (const auto& t : m.altered) {
    altered.push_back({{"id", t.id}, {"medium", t.medium}, {"offset", t.offset}});
  }
  return Json{{"altered", altered}, {"objects_total", m.objects_total}};
}

std::set<std::string> damaged_objects(const AuditReport& report) {
  std::set<std::string> damaged;
  for (const auto& f : report.findings) {
    if (!f.cloud_match) damaged.insert("cloud:" + cloud_key_for({f.record_type, f.object_id, {}, {}}));
    if (!f.cas_match) damaged.insert("cas:" + f.h_prime_x);
  }
  return damaged;
}

std::size_t detected_objects(const AuditReport& report) { return damaged_objects(report).size(); }

DetectionScore score_detection(const AuditReport& report, const TamperManifest& manifest) {
  std::set<std::string> injected;
  for (const auto& o : manifest.altered) injected.insert(o.medium + ":" + o.id);
  const auto found = damaged_objects(report);
  DetectionScore d;
  for (const auto& id : found) (injected.contains(id) ? d.true_positives : d.false_positives)++;
  for (const auto& id : injected) d.false_negatives += found.contains(id) ? 0 : 1;
  return d;
}

std::vector<BenchRow> audit_benchmark(const BenchOptions& options) {
  if (options.rates.empty() || !std::is_sorted(options.rates.begin(), options.rates.end())) {
    throw Error(ErrorCode::kInvalidConfig, "rates must be non-empty and ascending");
  }
  if (options.n_files == 0 || options.repetitions == 0) {
    throw Error(ErrorCode::kInvalidConfig, "files and repetitions must be positive");
  }
  const fs::path store_dir = options.work_dir / "bench-store";
  std::error_code ec;
  fs::remove_all(store_dir, ec);
  const auto layout = StoreLayout::under(store_dir);
  CloudStore cloud(layout.cloud);
  ContentStore cas(layout.cas);
  Ledger ledger(std::make_unique<FileLedgerBackend>(layout.ledger));
  const std::string key = "benchmark-anonymization-key";

  const auto traces = generate_fixtures(options.seed, options.n_files);
  const Timestamp t0 = Timestamp::parse("2026-01-01T00:00:00.000Z");
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    const ExpertContext expert{"E" + std::to_string(1 + i % 3), t.predicted_class,
                               "10.0.0." + std::to_string(1 + i % 3)};
    store_and_anchor(build_metadata(t, score_instance(t), nullptr, expert, Timestamp{t0.unix_ms + static_cast<std::int64_t>(i)}),
                     key, cloud, cas, ledger);
  }
  ledger.flush();

  AuditOptions audit;
  audit.workers = options.workers;
  audit.key = key;
  audit.quarantine_dir = store_dir / "quarantine";
  audit.clock = [t0] { return t0; };
  audit.recover = false;
  ::sync();
  audit_sweep(ledger, cloud, cas, audit);  // warm the page cache
  audit.recover = true;

  std::vector<BenchRow> rows(options.rates.size());
  for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
    for (std::size_t r = 0; r < options.rates.size(); ++r) {
      auto& row = rows[r];
      row.rate = options.rates[r];
      const auto manifest = tamper_inject(cloud, cas, row.rate, options.seed + r);
      audit.run_id = "bench-" + std::to_string(rep) + "-" + std::to_string(r);
      const auto report = audit_sweep(ledger, cloud, cas, audit);
      undo_tamper(manifest, cloud, cas);
      fs::remove_all(audit.quarantine_dir, ec);
      // Keep this run's writeback out of the next run's timing.
      ::sync();
      const auto score = score_detection(report, manifest);
      row.detected = score.true_positives + score.false_positives;
      row.injected = manifest.altered.size();
      row.false_positives = std::max(row.false_positives, score.false_positives);
      row.false_negatives = std::max(row.false_negatives, score.false_negatives);
      row.samples_ms.push_back(report.wall_time_ms);
    }
  }
  for (auto& row : rows) {
    double sum = 0;
    for (double s : row.samples_ms) sum += s;
    row.mean_ms = sum / static_cast<double>(row.samples_ms.size());
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "rate_pct,mean_ms,detected,injected,false_positives,false_negatives\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.3f,%zu,%zu,%zu,%zu\n", format_decimal(r.rate * 100.0).c_str(), r.mean_ms,
                  r.detected, r.injected, r.false_positives, r.false_negatives);
    out += buf;
  }
  return out;
}

}  // namespace veridical
