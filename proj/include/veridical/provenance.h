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

#include "veridical/ledger.h"
#include "veridical/trace_model.h"
#include "veridical/uncertainty.h"

#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace veridical {

// The off-chain metadata file for one decision event.
struct MetadataFile {
  std::string instance_id;
  std::string model_id;
  std::string prompt;
  std::string response;
  std::string llm_decision;
  double decision_entropy = 0.0;
  double decision_perplexity = 0.0;
  std::string xai_technique;
  std::vector<WordScore> explanation_summary;
  std::string expert_id;
  std::string expert_final_decision;
  std::string workstation_ip;
  Timestamp timestamp;

  bool operator==(const MetadataFile&) const = default;
};

struct ExpertContext {
  std::string expert_id;
  std::string expert_final_decision;
  std::string workstation_ip;
};

// `explanation` may be null when no saliency exists for the instance; the
// technique is then recorded as "none". Errors: kMissingField.
MetadataFile build_metadata(const DecisionTrace& trace, const InstanceScore& score,
                            const SaliencyRecord* explanation, const ExpertContext& expert, Timestamp at);

Json to_json(const MetadataFile& f);
MetadataFile metadata_from_json(const Json& j);
// Canonical bytes; this is what lands in the cloud store.
std::string serialize(const MetadataFile& f);

// Pattern -> replacement, applied to prompt, response and explanation words.
struct RedactionRule {
  std::regex pattern;
  std::string replacement;
};
std::vector<RedactionRule> default_redaction_rules();

constexpr std::size_t kMinKeyBytes = 16;

// Reads the key file; trailing whitespace is dropped. kWeakKey when fewer
// than 16 bytes remain, kNotFound when missing.
std::string load_key(const std::filesystem::path& path);

std::string keyed_hash(std::string_view key, std::string_view value);  // 64 hex
std::string pseudonym(std::string_view key, std::string_view value);   // 16 hex

class AnonymizedMetadata {
 public:
  const MetadataFile& fields() const { return fields_; }
  std::string serialize() const;

 private:
  friend AnonymizedMetadata anonymize(const MetadataFile&, std::string_view,
                                      const std::vector<RedactionRule>&);
  explicit AnonymizedMetadata(MetadataFile f) : fields_(std::move(f)) {}
  MetadataFile fields_;
};

// Errors: kWeakKey; kRejectedPrecondition if a raw identifier would survive.
AnonymizedMetadata anonymize(const MetadataFile& file, std::string_view key,
                             const std::vector<RedactionRule>& rules = default_redaction_rules());

// Mutable object store rooted at a directory; keys are relative paths.
class CloudStore {
 public:
  explicit CloudStore(std::filesystem::path root);
  // Atomic replace via rename. Errors: kStoreUnavailable.
  void put(const std::string& key, std::string_view bytes);
  std::optional<std::string> get(const std::string& key) const;
  bool exists(const std::string& key) const;
  std::filesystem::path path_of(const std::string& key) const;
  // Keys under a prefix directory, sorted.
  std::vector<std::string> list(const std::string& prefix) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// Write-once store addressed by SHA-256 of the content.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path root);
  // Returns the digest; an existing object is left untouched.
  std::string put(std::string_view bytes);
  std::optional<std::string> get(const std::string& digest) const;
  bool contains(const std::string& digest) const;
  std::filesystem::path path_of(const std::string& digest) const;
  std::vector<std::string> list() const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

std::string cloud_key_for(const OnChainRecord& record);

// Judgment versions of an instance get "<instance>~<expert pseudonym>".
std::string judgment_object_id(std::string_view instance_id, std::string_view key, std::string_view expert_id);

// Writes the cloud file and its anonymized CAS twin, then queues the
// on-chain record on the ledger (caller decides when to flush).
OnChainRecord store_and_anchor(const MetadataFile& file, std::string_view key, CloudStore& cloud,
                               ContentStore& cas, Ledger& ledger, const std::string& object_id = {},
                               const std::vector<RedactionRule>& rules = default_redaction_rules());

// Anchors an external parameter artifact: both hashes are its SHA-256.
OnChainRecord anchor_model_update(const std::string& model_id, std::string_view artifact, std::string_view key,
                                  const ExpertContext& publisher, CloudStore& cloud, ContentStore& cas,
                                  Ledger& ledger);

// Directory layout under a data dir.
struct StoreLayout {
  std::filesystem::path cloud;
  std::filesystem::path cas;
  std::filesystem::path ledger;

  static StoreLayout under(const std::filesystem::path& data_dir);
};

}  // namespace veridical
