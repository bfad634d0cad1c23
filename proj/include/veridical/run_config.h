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

#include "veridical/deployment_gate.h"
#include "veridical/triage.h"
#include "veridical/uncertainty.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

namespace veridical {

struct ServiceConfig {
  std::string bind = "127.0.0.1";
  int port = 8080;
  bool test_mode = false;
  std::string bearer_token;  // empty: no auth
  std::string workstation_ip = "127.0.0.1";  // recorded on auto-accepted decisions
  std::size_t raters_per_item = 3;
};

struct RunConfig {
  std::filesystem::path data_dir;
  std::set<std::string> labels{"fund", "reject"};
  std::string positive_class = "fund";
  std::filesystem::path key_file;
  std::optional<std::filesystem::path> lexicon_file;
  std::string model_id = "llama3-8b-sim";
  TriageConfig triage;
  std::size_t sample_target = 70;
  WindowConfig window;
  GateThresholds gate;
  int max_iterations = 5;
  double beta1 = 0.5;
  double beta2 = 0.5;
  ServiceConfig service;

  // kConfigInvalid on bad values or missing referenced paths.
  void validate() const;
};

// Key-value tree file ("key = value" lines, [section] headers, ';' or '#'
// comments, optional quotes around values). VERIDICAL_DATA_DIR overrides
// data_dir. Relative paths resolve against the config file's directory.
// Errors: kConfigInvalid, kNotFound.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});

// Thresholds from the same format, under [gate] or at top level.
GateThresholds load_thresholds(const std::filesystem::path& path);

}  // namespace veridical
