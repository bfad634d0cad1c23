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

#include "veridical/ledger.h"

#include "veridical/crypto.h"
#include "veridical/error.h"

#include <fstream>
#include <sstream>

namespace veridical {

std::string_view to_string(RecordType t) {
  return t == RecordType::kModelUpdate ? "model_update" : "decision_event";
}

RecordType parse_record_type(std::string_view s) {
  if (s == "decision_event") return RecordType::kDecisionEvent;
  if (s == "model_update") return RecordType::kModelUpdate;
  throw Error(ErrorCode::kMalformedRecord, "unknown record_type '" + std::string(s) + "'");
}

std::string encode_payload(const AnchoredHashes& h) {
  return base64_encode(canonical_dump(Json{{"h'_x", h.h_prime_x}, {"h_x", h.h_x}}));
}

AnchoredHashes decode_payload(std::string_view payload) {
  Json j;
  try {
    j = Json::parse(base64_decode(payload));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("payload is not JSON: ") + e.what());
  }
  if (!j.is_object() || j.size() != 2 || !j.contains("h_x") || !j.contains("h'_x") || !j["h_x"].is_string() ||
      !j["h'_x"].is_string()) {
    throw Error(ErrorCode::kMalformedRecord, "payload must hold exactly h_x and h'_x");
  }
  AnchoredHashes h{j["h_x"].get<std::string>(), j["h'_x"].get<std::string>()};
  if (!is_hex_digest(h.h_x) || !is_hex_digest(h.h_prime_x)) {
    throw Error(ErrorCode::kMalformedRecord, "payload hashes must be 64 lowercase hex chars");
  }
  return h;
}

std::string instance_of(std::string_view object_id) {
  return std::string(object_id.substr(0, object_id.find('~')));
}

Json to_json(const OnChainRecord& r) {
  return Json{{"object_id", r.object_id},
              {"payload", r.payload},
              {"record_type", std::string(to_string(r.record_type))},
              {"separate_hashes",
               {{"expert_id_hash", r.separate_hashes.expert_id_hash},
                {"ip_hash", r.separate_hashes.ip_hash},
                {"model_id_hash", r.separate_hashes.model_id_hash}}}};
}

OnChainRecord on_chain_record_from_json(const Json& j, std::size_t line) {
  if (!j.is_object() || j.size() != 4) throw MalformedRecord(line, "on-chain record must have exactly 4 fields");
  OnChainRecord r;
  try {
    r.record_type = parse_record_type(require_string(j, "record_type", line));
  } catch (const MalformedRecord&) {
    throw;
  } catch (const Error& e) {
    throw MalformedRecord(line, e.detail());
  }
  r.object_id = require_string(j, "object_id", line);
  r.payload = require_string(j, "payload", line);
  const Json& s = require_field(j, "separate_hashes", line);
  if (!s.is_object() || s.size() != 3) throw MalformedRecord(line, "separate_hashes must have exactly 3 fields");
  r.separate_hashes = {require_string(s, "expert_id_hash", line), require_string(s, "model_id_hash", line),
                       require_string(s, "ip_hash", line)};
  for (const auto* h : {&r.separate_hashes.expert_id_hash, &r.separate_hashes.model_id_hash,
                        &r.separate_hashes.ip_hash}) {
    if (!is_hex_digest(*h)) throw MalformedRecord(line, "separate hash is not 64 lowercase hex chars");
  }
  return r;
}

namespace {

Json block_body(const LedgerBlock& b) {
  Json records = Json::array();
  for (const auto& r : b.records) records.push_back(to_json(r));
  return Json{{"index", b.index}, {"prev_hash", b.prev_hash}, {"records", records},
              {"timestamp", b.timestamp.to_string()}};
}

}  // namespace

std::string compute_block_hash(const LedgerBlock& block) { return sha256_hex(canonical_dump(block_body(block))); }

Json to_json(const LedgerBlock& b) {
  Json j = block_body(b);
  j["block_hash"] = b.block_hash;
  return j;
}

LedgerBlock block_from_json(const Json& j, std::size_t line) {
  if (!j.is_object() || j.size() != 5) throw MalformedRecord(line, "block must have exactly 5 fields");
  LedgerBlock b;
  const Json& idx = require_field(j, "index", line);
  if (!idx.is_number_unsigned()) throw MalformedRecord(line, "index must be a non-negative integer");
  b.index = idx.get<std::uint64_t>();
  try {
    b.timestamp = Timestamp::parse(require_string(j, "timestamp", line));
  } catch (const MalformedRecord&) {
    throw;
  } catch (const Error& e) {
    throw MalformedRecord(line, e.detail());
  }
  b.prev_hash = require_string(j, "prev_hash", line);
  b.block_hash = require_string(j, "block_hash", line);
  const Json& records = require_field(j, "records", line);
  if (!records.is_array()) throw MalformedRecord(line, "records must be an array");
  for (const auto& r : records) b.records.push_back(on_chain_record_from_json(r, line));
  return b;
}

ChainVerification verify_chain(const std::vector<LedgerBlock>& blocks) {
  std::string prev = kGenesisPrevHash;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    auto bad = [&](const std::string& why) { return ChainVerification{false, i, why}; };
    if (b.index != i) return bad("index out of sequence");
    if (b.prev_hash != prev) return bad("prev_hash does not match predecessor");
    if (b.records.empty() || b.records.size() > kMaxRecordsPerBlock) return bad("record count out of range");
    const std::string recomputed = compute_block_hash(b);
    if (recomputed != b.block_hash) return bad("block_hash does not recompute");
    prev = recomputed;
  }
  return {};
}

ChainVerification verify_chain_lines(const std::vector<std::string>& lines) {
  std::vector<LedgerBlock> blocks;
  blocks.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      Json j = Json::parse(lines[i]);
      if (canonical_dump(j) != lines[i]) return {false, i, "line is not in canonical form"};
      blocks.push_back(block_from_json(j, i + 1));
      if (lines[i].size() > kMaxBlockBytes) return {false, i, "block exceeds size limit"};
    } catch (const std::exception& e) {
      return {false, i, std::string("unparseable block: ") + e.what()};
    }
  }
  return verify_chain(blocks);
}

FileLedgerBackend::FileLedgerBackend(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
}

std::vector<std::string> FileLedgerBackend::read_lines() const {
  std::vector<std::string> out;
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

void FileLedgerBackend::append_line(std::size_t expected_count, const std::string& line) {
  // Another writer may have appended since our tip was read. Recount only
  // when the file size moved under us.
  std::error_code ec;
  auto size = std::filesystem::file_size(path_, ec);
  if (ec) size = 0;
  if (!cache_valid_ || size != cached_bytes_) {
    cached_count_ = read_lines().size();
    cached_bytes_ = size;
    cache_valid_ = true;
  }
  const std::size_t have = cached_count_;
  if (have != expected_count) {
    throw Error(ErrorCode::kLedgerAppendConflict,
                "ledger holds " + std::to_string(have) + " blocks, expected " + std::to_string(expected_count));
  }
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kStoreUnavailable, "cannot open ledger " + path_.string());
  out << line << '\n';
  out.flush();
  if (!out) {
    cache_valid_ = false;
    throw Error(ErrorCode::kStoreUnavailable, "ledger write failed");
  }
  ++cached_count_;
  cached_bytes_ += line.size() + 1;
}

std::vector<std::string> MemoryLedgerBackend::read_lines() const {
  std::lock_guard lock(mu_);
  return lines_;
}

void MemoryLedgerBackend::append_line(std::size_t expected_count, const std::string& line) {
  std::lock_guard lock(mu_);
  if (lines_.size() != expected_count) {
    throw Error(ErrorCode::kLedgerAppendConflict, "memory ledger moved");
  }
  lines_.push_back(line);
}

Ledger::Ledger(std::unique_ptr<LedgerBackend> backend, Clock clock, std::size_t max_records, std::size_t max_bytes)
    : backend_(std::move(backend)), clock_(std::move(clock)), max_records_(max_records), max_bytes_(max_bytes) {
  if (max_records_ < 1 || max_records_ > kMaxRecordsPerBlock || max_bytes_ > kMaxBlockBytes) {
    throw Error(ErrorCode::kInvalidConfig, "ledger batch limits out of range");
  }
  reload();
}

void Ledger::reload() {
  std::lock_guard lock(mu_);
  const auto lines = backend_->read_lines();
  committed_ = lines.size();
  tip_hash_ = kGenesisPrevHash;
  if (!lines.empty()) {
    try {
      tip_hash_ = block_from_json(Json::parse(lines.back()), lines.size()).block_hash;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kChainBroken, std::string("ledger tip unreadable: ") + e.what());
    }
  }
}

void Ledger::append(const OnChainRecord& record) {
  const std::size_t size = canonical_dump(to_json(record)).size() + 1;
  // Envelope: index, timestamp, two hashes and key names.
  constexpr std::size_t kEnvelope = 256;
  if (size + kEnvelope > max_bytes_) throw Error(ErrorCode::kRejectedPrecondition, "record larger than a block");
  std::lock_guard lock(mu_);
  if (!pending_.empty() && pending_bytes_ + size + kEnvelope > max_bytes_) seal_locked();
  pending_.push_back(record);
  pending_bytes_ += size;
  if (pending_.size() >= max_records_) seal_locked();
}

void Ledger::flush() {
  std::lock_guard lock(mu_);
  if (!pending_.empty()) seal_locked();
}

void Ledger::seal_locked() {
  LedgerBlock b;
  b.index = committed_;
  b.timestamp = clock_();
  b.prev_hash = tip_hash_;
  b.records = pending_;
  b.block_hash = compute_block_hash(b);
  const std::string line = canonical_dump(to_json(b));
  backend_->append_line(committed_, line);
  ++committed_;
  tip_hash_ = b.block_hash;
  pending_.clear();
  pending_bytes_ = 0;
}

std::vector<LedgerBlock> Ledger::blocks() const {
  std::vector<LedgerBlock> out;
  const auto lines = backend_->read_lines();
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(block_from_json(parse_record_line(lines[i], i + 1), i + 1));
  return out;
}

std::size_t Ledger::block_count() const {
  std::lock_guard lock(mu_);
  return committed_;
}

std::size_t Ledger::pending_count() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

ChainVerification Ledger::verify() const { return verify_chain_lines(backend_->read_lines()); }

}  // namespace veridical
