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

#include "veridical/provenance.h"

#include "veridical/crypto.h"
#include "veridical/error.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>
#include <thread>

namespace veridical {
namespace fs = std::filesystem;

namespace {

void require_nonempty(const std::string& value, const char* field) {
  if (value.empty()) throw Error(ErrorCode::kMissingField, field);
}

bool is_ipv4(const std::string& s) {
  static const std::regex re(R"((\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3}))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) return false;
  for (int i = 1; i <= 4; ++i) {
    if (std::stoi(m[i].str()) > 255) return false;
  }
  return true;
}

bool is_safe_id(std::string_view id) {
  if (id.empty() || id.size() > 200 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
           c == '-' || c == '@' || c == ':' || c == '~';
  });
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string apply_rules(std::string s, const std::vector<RedactionRule>& rules) {
  for (const auto& r : rules) s = std::regex_replace(s, r.pattern, r.replacement);
  return s;
}

// Unique sibling name for write-then-rename.
fs::path temp_sibling(const fs::path& target) {
  static std::atomic<std::uint64_t> counter{0};
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  return target.parent_path() /
         ("." + target.filename().string() + ".tmp" + std::to_string(tid) + "-" + std::to_string(counter++));
}

void atomic_write(const fs::path& target, std::string_view bytes) {
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = temp_sibling(target);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kStoreUnavailable, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kStoreUnavailable, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kStoreUnavailable, "cannot publish " + target.string());
  }
}

std::optional<std::string> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

MetadataFile build_metadata(const DecisionTrace& trace, const InstanceScore& score,
                            const SaliencyRecord* explanation, const ExpertContext& expert, Timestamp at) {
  require_nonempty(trace.instance_id, "instance_id");
  require_nonempty(trace.model_id, "model_id");
  require_nonempty(trace.prompt_text, "prompt");
  require_nonempty(trace.response_text, "response");
  require_nonempty(trace.predicted_class, "llm_decision");
  require_nonempty(expert.expert_id, "expert_id");
  require_nonempty(expert.expert_final_decision, "expert_final_decision");
  require_nonempty(expert.workstation_ip, "workstation_ip");
  if (!is_ipv4(expert.workstation_ip)) {
    throw Error(ErrorCode::kRejectedPrecondition, "workstation_ip is not IPv4: " + expert.workstation_ip);
  }
  if (score.instance_id != trace.instance_id) {
    throw Error(ErrorCode::kRejectedPrecondition, "score belongs to " + score.instance_id);
  }
  MetadataFile f;
  f.instance_id = trace.instance_id;
  f.model_id = trace.model_id;
  f.prompt = trace.prompt_text;
  f.response = trace.response_text;
  f.llm_decision = trace.predicted_class;
  f.decision_entropy = round_decimal(score.entropy);
  f.decision_perplexity = round_decimal(score.perplexity);
  if (explanation) {
    if (explanation->instance_id != trace.instance_id) {
      throw Error(ErrorCode::kRejectedPrecondition, "explanation belongs to " + explanation->instance_id);
    }
    require_nonempty(explanation->technique_id, "xai_technique");
    f.xai_technique = explanation->technique_id;
    for (const auto& w : explanation->original_scores) f.explanation_summary.push_back({w.word, round_decimal(w.score)});
  } else {
    f.xai_technique = "none";
  }
  f.expert_id = expert.expert_id;
  f.expert_final_decision = expert.expert_final_decision;
  f.workstation_ip = expert.workstation_ip;
  f.timestamp = at;
  return f;
}

Json to_json(const MetadataFile& f) {
  Json words = Json::array();
  for (const auto& w : f.explanation_summary) words.push_back({{"score", w.score}, {"word", w.word}});
  return Json{{"decision_entropy", f.decision_entropy},
              {"decision_perplexity", f.decision_perplexity},
              {"expert_final_decision", f.expert_final_decision},
              {"expert_id", f.expert_id},
              {"explanation_summary", words},
              {"instance_id", f.instance_id},
              {"llm_decision", f.llm_decision},
              {"model_id", f.model_id},
              {"prompt", f.prompt},
              {"response", f.response},
              {"timestamp", f.timestamp.to_string()},
              {"workstation_ip", f.workstation_ip},
              {"xai_technique", f.xai_technique}};
}

MetadataFile metadata_from_json(const Json& j) {
  if (!j.is_object() || j.size() != 13) throw MalformedRecord(0, "metadata file must have exactly 13 fields");
  MetadataFile f;
  f.decision_entropy = require_number(j, "decision_entropy", 0);
  f.decision_perplexity = require_number(j, "decision_perplexity", 0);
  f.expert_final_decision = require_string(j, "expert_final_decision", 0);
  f.expert_id = require_string(j, "expert_id", 0);
  const Json& words = require_field(j, "explanation_summary", 0);
  if (!words.is_array()) throw MalformedRecord(0, "explanation_summary must be an array");
  for (const auto& w : words) {
    if (!w.is_object() || w.size() != 2) throw MalformedRecord(0, "explanation entries are {score, word}");
    f.explanation_summary.push_back({require_string(w, "word", 0), require_number(w, "score", 0)});
  }
  f.instance_id = require_string(j, "instance_id", 0);
  f.llm_decision = require_string(j, "llm_decision", 0);
  f.model_id = require_string(j, "model_id", 0);
  f.prompt = require_string(j, "prompt", 0);
  f.response = require_string(j, "response", 0);
  f.timestamp = Timestamp::parse(require_string(j, "timestamp", 0));
  f.workstation_ip = require_string(j, "workstation_ip", 0);
  f.xai_technique = require_string(j, "xai_technique", 0);
  return f;
}

std::string serialize(const MetadataFile& f) { return canonical_dump(to_json(f)); }

std::vector<RedactionRule> default_redaction_rules() {
  return {{std::regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})"), "[email]"},
          {std::regex(R"(\b\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}\b)"), "[ip]"}};
}

std::string load_key(const fs::path& path) {
  auto bytes = read_bytes(path);
  if (!bytes) throw Error(ErrorCode::kNotFound, "key file " + path.string());
  while (!bytes->empty() && std::isspace(static_cast<unsigned char>(bytes->back()))) bytes->pop_back();
  if (bytes->size() < kMinKeyBytes) throw Error(ErrorCode::kWeakKey, "key shorter than 16 bytes");
  return *bytes;
}

std::string keyed_hash(std::string_view key, std::string_view value) { return hmac_sha256_hex(key, value); }

std::string pseudonym(std::string_view key, std::string_view value) { return keyed_hash(key, value).substr(0, 16); }

std::string AnonymizedMetadata::serialize() const { return veridical::serialize(fields_); }

AnonymizedMetadata anonymize(const MetadataFile& file, std::string_view key, const std::vector<RedactionRule>& rules) {
  if (key.size() < kMinKeyBytes) throw Error(ErrorCode::kWeakKey, "key shorter than 16 bytes");
  require_nonempty(file.expert_id, "expert_id");
  require_nonempty(file.workstation_ip, "workstation_ip");
  const std::string expert = pseudonym(key, file.expert_id);
  const std::string ip = pseudonym(key, file.workstation_ip);

  MetadataFile out = file;
  auto scrub = [&](std::string& s) {
    replace_all(s, file.expert_id, expert);
    replace_all(s, file.workstation_ip, ip);
  };
  out.prompt = apply_rules(out.prompt, rules);
  out.response = apply_rules(out.response, rules);
  for (auto& w : out.explanation_summary) {
    w.word = apply_rules(w.word, rules);
    scrub(w.word);
  }
  for (std::string* s : {&out.instance_id, &out.model_id, &out.prompt, &out.response, &out.llm_decision,
                         &out.xai_technique, &out.expert_final_decision}) {
    scrub(*s);
  }
  out.expert_id = expert;
  out.workstation_ip = ip;

  AnonymizedMetadata anon(std::move(out));
  const std::string bytes = anon.serialize();
  if (bytes.find(file.expert_id) != std::string::npos || bytes.find(file.workstation_ip) != std::string::npos) {
    throw Error(ErrorCode::kRejectedPrecondition, "raw identifier survives anonymization");
  }
  return anon;
}

CloudStore::CloudStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::kStoreUnavailable, "cannot create cloud store at " + root_.string());
}

fs::path CloudStore::path_of(const std::string& key) const {
  if (key.empty() || key.find("..") != std::string::npos || key.front() == '/') {
    throw Error(ErrorCode::kRejectedPrecondition, "bad cloud key '" + key + "'");
  }
  return root_ / key;
}

void CloudStore::put(const std::string& key, std::string_view bytes) { atomic_write(path_of(key), bytes); }

std::optional<std::string> CloudStore::get(const std::string& key) const { return read_bytes(path_of(key)); }

bool CloudStore::exists(const std::string& key) const { return fs::is_regular_file(path_of(key)); }

std::vector<std::string> CloudStore::list(const std::string& prefix) const {
  std::vector<std::string> out;
  std::error_code ec;
  const fs::path dir = root_ / prefix;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    const auto name = it->path().filename().string();
    if (it->is_regular_file() && !name.empty() && name[0] != '.') out.push_back(prefix + "/" + name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ContentStore::ContentStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::kStoreUnavailable, "cannot create content store at " + root_.string());
}

fs::path ContentStore::path_of(const std::string& digest) const {
  if (!is_hex_digest(digest)) throw Error(ErrorCode::kRejectedPrecondition, "not a digest: " + digest);
  return root_ / digest.substr(0, 2) / digest;
}

std::string ContentStore::put(std::string_view bytes) {
  const std::string digest = sha256_hex(bytes);
  const fs::path p = path_of(digest);
  if (!fs::exists(p)) atomic_write(p, bytes);
  return digest;
}

std::optional<std::string> ContentStore::get(const std::string& digest) const { return read_bytes(path_of(digest)); }

bool ContentStore::contains(const std::string& digest) const { return fs::is_regular_file(path_of(digest)); }

std::vector<std::string> ContentStore::list() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(root_, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto name = it->path().filename().string();
    if (is_hex_digest(name)) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string cloud_key_for(const OnChainRecord& record) {
  if (!is_safe_id(record.object_id)) throw Error(ErrorCode::kRejectedPrecondition, "bad object id " + record.object_id);
  return record.record_type == RecordType::kModelUpdate ? "models/" + record.object_id + ".bin"
                                                        : "decisions/" + record.object_id + ".json";
}

std::string judgment_object_id(std::string_view instance_id, std::string_view key, std::string_view expert_id) {
  return std::string(instance_id) + "~" + pseudonym(key, expert_id);
}

OnChainRecord store_and_anchor(const MetadataFile& file, std::string_view key, CloudStore& cloud, ContentStore& cas,
                               Ledger& ledger, const std::string& object_id,
                               const std::vector<RedactionRule>& rules) {
  const AnonymizedMetadata anon = anonymize(file, key, rules);
  OnChainRecord record;
  record.record_type = RecordType::kDecisionEvent;
  record.object_id = object_id.empty() ? file.instance_id : object_id;
  if (!is_safe_id(record.object_id) || instance_of(record.object_id) != file.instance_id) {
    throw Error(ErrorCode::kRejectedPrecondition, "object id '" + record.object_id + "' unusable as a store key");
  }
  const std::string cloud_bytes = serialize(file);
  cloud.put(cloud_key_for(record), cloud_bytes);
  const std::string h_prime = cas.put(anon.serialize());
  record.payload = encode_payload({sha256_hex(cloud_bytes), h_prime});
  record.separate_hashes = {keyed_hash(key, file.expert_id), keyed_hash(key, file.model_id),
                            keyed_hash(key, file.workstation_ip)};
  ledger.append(record);
  return record;
}

OnChainRecord anchor_model_update(const std::string& model_id, std::string_view artifact, std::string_view key,
                                  const ExpertContext& publisher, CloudStore& cloud, ContentStore& cas,
                                  Ledger& ledger) {
  if (key.size() < kMinKeyBytes) throw Error(ErrorCode::kWeakKey, "key shorter than 16 bytes");
  require_nonempty(model_id, "model_id");
  require_nonempty(publisher.expert_id, "expert_id");
  require_nonempty(publisher.workstation_ip, "workstation_ip");
  const std::string digest = sha256_hex(artifact);
  OnChainRecord record;
  record.record_type = RecordType::kModelUpdate;
  record.object_id = model_id + "@" + digest.substr(0, 12);
  cloud.put(cloud_key_for(record), artifact);
  cas.put(artifact);
  record.payload = encode_payload({digest, digest});
  record.separate_hashes = {keyed_hash(key, publisher.expert_id), keyed_hash(key, model_id),
                            keyed_hash(key, publisher.workstation_ip)};
  ledger.append(record);
  return record;
}

StoreLayout StoreLayout::under(const fs::path& data_dir) {
  return {data_dir / "cloud", data_dir / "cas", data_dir / "ledger" / "chain.jsonl"};
}

}  // namespace veridical
