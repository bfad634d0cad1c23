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

#include "veridical/canonical_json.h"
#include "veridical/timestamp.h"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace veridical {

enum class RecordType { kDecisionEvent, kModelUpdate };
std::string_view to_string(RecordType t);
RecordType parse_record_type(std::string_view s);

struct SeparateHashes {
  std::string expert_id_hash;
  std::string model_id_hash;
  std::string ip_hash;

  bool operator==(const SeparateHashes&) const = default;
};

// What goes on-chain for one anchored object. `object_id` names the cloud
// object (decisions/<id>.json or models/<id>.bin) the hashes refer to.
struct OnChainRecord {
  RecordType record_type = RecordType::kDecisionEvent;
  std::string object_id;
  std::string payload;  // BASE64 of canonical {"h'_x": ..., "h_x": ...}
  SeparateHashes separate_hashes;

  bool operator==(const OnChainRecord&) const = default;
};

struct AnchoredHashes {
  std::string h_x;        // cloud file
  std::string h_prime_x;  // anonymized CAS twin

  bool operator==(const AnchoredHashes&) const = default;
};

std::string encode_payload(const AnchoredHashes& hashes);
// kMalformedRecord unless the payload decodes to exactly the two digests.
AnchoredHashes decode_payload(std::string_view payload);

// Instance part of an object id (judgment versions carry a "~" suffix).
std::string instance_of(std::string_view object_id);

Json to_json(const OnChainRecord& r);
OnChainRecord on_chain_record_from_json(const Json& j, std::size_t line = 0);

inline const std::string kGenesisPrevHash(64, '0');
constexpr std::size_t kMaxRecordsPerBlock = 10;
constexpr std::size_t kMaxBlockBytes = 10u * 1024u * 1024u;

struct LedgerBlock {
  std::uint64_t index = 0;
  Timestamp timestamp;
  std::string prev_hash;
  std::vector<OnChainRecord> records;
  std::string block_hash;

  bool operator==(const LedgerBlock&) const = default;
};

// SHA-256 over canonical {index, prev_hash, records, timestamp}.
std::string compute_block_hash(const LedgerBlock& block);
Json to_json(const LedgerBlock& b);
LedgerBlock block_from_json(const Json& j, std::size_t line = 0);

struct ChainVerification {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_index;
  std::string reason;
};

ChainVerification verify_chain(const std::vector<LedgerBlock>& blocks);
// Also rejects lines that are not the canonical serialization of the block
// they parse to, so a byte flip anywhere in a line is caught.
ChainVerification verify_chain_lines(const std::vector<std::string>& lines);

// Where sealed blocks live. The file and memory backends are local; a
// network client would implement the same two calls.
class LedgerBackend {
 public:
  virtual ~LedgerBackend() = default;
  virtual std::vector<std::string> read_lines() const = 0;
  // kLedgerAppendConflict when the backend no longer holds exactly
  // `expected_count` blocks.
  virtual void append_line(std::size_t expected_count, const std::string& line) = 0;
};

class FileLedgerBackend : public LedgerBackend {
 public:
  explicit FileLedgerBackend(std::filesystem::path path);
  std::vector<std::string> read_lines() const override;
  void append_line(std::size_t expected_count, const std::string& line) override;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool cache_valid_ = false;
  std::size_t cached_count_ = 0;
  std::uintmax_t cached_bytes_ = 0;
};

class MemoryLedgerBackend : public LedgerBackend {
 public:
  std::vector<std::string> read_lines() const override;
  void append_line(std::size_t expected_count, const std::string& line) override;
  // Test hook for mutation checks.
  std::vector<std::string>& raw() { return lines_; }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
};

// Single-writer batching ledger. Records queue until ten are pending (or
// the next would push the block past 10 MB), then seal into a block;
// flush() seals whatever is pending. Only sealed blocks are visible.
class Ledger {
 public:
  Ledger(std::unique_ptr<LedgerBackend> backend, Clock clock = system_clock(),
         std::size_t max_records = kMaxRecordsPerBlock, std::size_t max_bytes = kMaxBlockBytes);

  void append(const OnChainRecord& record);
  void flush();

  std::vector<LedgerBlock> blocks() const;
  std::size_t block_count() const;
  std::size_t pending_count() const;
  ChainVerification verify() const;
  // Re-reads the backend tip, e.g. after a conflict.
  void reload();

  LedgerBackend& backend() { return *backend_; }

 private:
  void seal_locked();

  std::unique_ptr<LedgerBackend> backend_;
  Clock clock_;
  std::size_t max_records_;
  std::size_t max_bytes_;
  mutable std::mutex mu_;
  std::size_t committed_ = 0;
  std::string tip_hash_ = kGenesisPrevHash;
  std::vector<OnChainRecord> pending_;
  std::size_t pending_bytes_ = 0;
};

}  // namespace veridical
