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

#include "veridical/run_config.h"

#include "veridical/error.h"
#include "veridical/trace_model.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace veridical {
namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

std::string unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

// Strips trailing " # comment" and quotes; the ini parser keeps both.
std::string clean(std::string v) {
  if (!v.empty() && v.front() != '"' && v.front() != '\'') {
    for (const char* mark : {" #", " ;"}) {
      auto pos = v.find(mark);
      if (pos != std::string::npos) v.erase(pos);
    }
  }
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
  return unquote(v);
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& key) {
  auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!v) return std::nullopt;
  return clean(*v);
}

double get_double(const pt::ptree& tree, const std::string& key, double fallback) {
  auto v = get(tree, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfigInvalid, key + " is not a number: '" + *v + "'");
  }
}

long long get_int(const pt::ptree& tree, const std::string& key, long long fallback) {
  auto v = get(tree, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    long long n = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfigInvalid, key + " is not an integer: '" + *v + "'");
  }
}

bool get_bool(const pt::ptree& tree, const std::string& key, bool fallback) {
  auto v = get(tree, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw Error(ErrorCode::kConfigInvalid, key + " is not a boolean: '" + *v + "'");
}

pt::ptree read_tree(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  return tree;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

GateThresholds thresholds_from_tree(const pt::ptree& tree, const std::string& prefix, GateThresholds t) {
  t.kappa_min = get_double(tree, prefix + "kappa_min", t.kappa_min);
  t.explanation_min = get_double(tree, prefix + "explanation_min", t.explanation_min);
  t.entropy_max = get_double(tree, prefix + "entropy_max", t.entropy_max);
  t.perplexity_max = get_double(tree, prefix + "perplexity_max", t.perplexity_max);
  return t;
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kConfigInvalid, why); };
  if (data_dir.empty()) fail("data_dir is required");
  if (!fs::is_directory(data_dir)) fail("data_dir does not exist: " + data_dir.string());
  if (key_file.empty()) fail("key_file is required");
  if (!fs::is_regular_file(key_file)) fail("key_file does not exist: " + key_file.string());
  if (lexicon_file && !fs::is_regular_file(*lexicon_file)) fail("lexicon does not exist: " + lexicon_file->string());
  if (labels.size() < 2) fail("at least two labels are required");
  if (!labels.contains(positive_class)) fail("positive_class must be one of the labels");
  if (model_id.empty()) fail("model_id is required");
  try {
    triage.validate();
    gate.validate();
  } catch (const Error& e) {
    fail(e.detail());
  }
  if (window.stride < 1 || window.stride > window.window) fail("need 1 <= stride <= window");
  if (sample_target == 0) fail("sample_target must be positive");
  if (max_iterations < 1) fail("max_iterations must be >= 1");
  if (beta1 < 0 || beta2 < 0 || std::abs(beta1 + beta2 - 1.0) > 1e-9) fail("beta1 + beta2 must equal 1");
  if (service.port < 0 || service.port > 65535) fail("port out of range");
  if (service.raters_per_item < 2) fail("raters_per_item must be >= 2");
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
  const pt::ptree tree = read_tree(text);
  RunConfig c;
  if (auto v = get(tree, "data_dir")) c.data_dir = resolve(base_dir, *v);
  if (const char* env = std::getenv("VERIDICAL_DATA_DIR"); env && *env) c.data_dir = env;
  if (auto v = get(tree, "labels")) {
    c.labels.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = clean(item);
      while (!item.empty() && item.front() == ' ') item.erase(0, 1);
      if (!item.empty()) c.labels.insert(item);
    }
  }
  if (auto v = get(tree, "positive_class")) c.positive_class = *v;
  if (auto v = get(tree, "key_file")) c.key_file = resolve(base_dir, *v);
  if (auto v = get(tree, "model_id")) c.model_id = *v;

  c.triage.ppl_threshold_percentile = get_double(tree, "triage.ppl_threshold_percentile", c.triage.ppl_threshold_percentile);
  c.triage.hc_quota_pct = get_double(tree, "triage.hc_quota_pct", c.triage.hc_quota_pct);
  c.triage.mc_quota_pct = get_double(tree, "triage.mc_quota_pct", c.triage.mc_quota_pct);
  c.triage.lc_quota_pct = get_double(tree, "triage.lc_quota_pct", c.triage.lc_quota_pct);
  c.triage.entropy_accept_max = get_double(tree, "triage.entropy_accept_max", c.triage.entropy_accept_max);
  c.triage.perplexity_accept_max = get_double(tree, "triage.perplexity_accept_max", c.triage.perplexity_accept_max);
  c.triage.seed = static_cast<std::uint64_t>(get_int(tree, "triage.seed", static_cast<long long>(c.triage.seed)));
  const long long target = get_int(tree, "triage.sample_target", static_cast<long long>(c.sample_target));
  if (target < 1) throw Error(ErrorCode::kConfigInvalid, "triage.sample_target must be positive");
  c.sample_target = static_cast<std::size_t>(target);
  const long long window = get_int(tree, "triage.window", static_cast<long long>(c.window.window));
  const long long stride = get_int(tree, "triage.stride", static_cast<long long>(c.window.stride));
  if (window < 1 || stride < 1) throw Error(ErrorCode::kConfigInvalid, "window and stride must be positive");
  c.window = {static_cast<std::size_t>(window), static_cast<std::size_t>(stride)};

  c.gate = thresholds_from_tree(tree, "gate.", c.gate);
  c.max_iterations = static_cast<int>(get_int(tree, "gate.max_iterations", c.max_iterations));

  c.beta1 = get_double(tree, "stability.beta1", c.beta1);
  c.beta2 = get_double(tree, "stability.beta2", c.beta2);
  if (auto v = get(tree, "stability.lexicon")) c.lexicon_file = resolve(base_dir, *v);

  if (auto v = get(tree, "service.bind")) c.service.bind = *v;
  c.service.port = static_cast<int>(get_int(tree, "service.port", c.service.port));
  c.service.test_mode = get_bool(tree, "service.test_mode", c.service.test_mode);
  if (auto v = get(tree, "service.bearer_token")) c.service.bearer_token = *v;
  if (auto v = get(tree, "service.workstation_ip")) c.service.workstation_ip = *v;
  const long long raters = get_int(tree, "service.raters_per_item", static_cast<long long>(c.service.raters_per_item));
  if (raters < 0) throw Error(ErrorCode::kConfigInvalid, "service.raters_per_item must be positive");
  c.service.raters_per_item = static_cast<std::size_t>(raters);
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::kNotFound, "config " + path.string());
  return parse_run_config(read_text_file(path), fs::absolute(path).parent_path());
}

GateThresholds load_thresholds(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error(ErrorCode::kNotFound, "thresholds " + path.string());
  const pt::ptree tree = read_tree(read_text_file(path));
  GateThresholds t = thresholds_from_tree(tree, "", GateThresholds{});
  t = thresholds_from_tree(tree, "gate.", t);
  try {
    t.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.detail());
  }
  return t;
}

}  // namespace veridical
