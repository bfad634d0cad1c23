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

#include "veridical/trace_model.h"
#include "test_util.h"

#include <cstdlib>

namespace veridical {
namespace {

using testing::TempDir;

struct ConfigDir {
  TempDir dir;
  ConfigDir() {
    std::filesystem::create_directories(dir.path() / "run");
    write_text_file(dir.path() / "key.bin", "0123456789abcdef0123456789abcdef");
    write_text_file(dir.path() / "lex.json", R"({"assets":["holdings"]})");
  }
  std::filesystem::path write(const std::string& text) const {
    write_text_file(dir.path() / "veridical.conf", text);
    return dir.path() / "veridical.conf";
  }
};

constexpr const char* kFull = R"(# run settings
data_dir = run
key_file = "key.bin"
labels = fund, reject, defer
positive_class = fund
model_id = mistral-sim

[triage]
ppl_threshold_percentile = 30
hc_quota_pct = 15
mc_quota_pct = 25
lc_quota_pct = 60
entropy_accept_max = 0.2   ; inline comment
perplexity_accept_max = 40
seed = 99
sample_target = 50
window = 256
stride = 128

[gate]
kappa_min = 0.6
explanation_min = 0.65
entropy_max = 0.15
perplexity_max = 45
max_iterations = 3

[stability]
beta1 = 0.3
beta2 = 0.7
lexicon = lex.json

[service]
bind = 0.0.0.0
port = 9090
test_mode = true
bearer_token = tok
workstation_ip = 10.0.0.1
raters_per_item = 4
)";

TEST(RunConfig, ParsesEverySection) {
  ConfigDir d;
  unsetenv("VERIDICAL_DATA_DIR");
  const auto c = load_run_config(d.write(kFull));
  EXPECT_EQ(c.data_dir, std::filesystem::absolute(d.dir.path()) / "run");
  EXPECT_EQ(c.key_file, std::filesystem::absolute(d.dir.path()) / "key.bin");
  EXPECT_EQ(c.labels, (std::set<std::string>{"defer", "fund", "reject"}));
  EXPECT_EQ(c.model_id, "mistral-sim");
  EXPECT_DOUBLE_EQ(c.triage.ppl_threshold_percentile, 30);
  EXPECT_DOUBLE_EQ(c.triage.hc_quota_pct, 15);
  EXPECT_DOUBLE_EQ(c.triage.entropy_accept_max, 0.2);
  EXPECT_EQ(c.triage.seed, 99u);
  EXPECT_EQ(c.sample_target, 50u);
  EXPECT_EQ(c.window.window, 256u);
  EXPECT_EQ(c.window.stride, 128u);
  EXPECT_DOUBLE_EQ(c.gate.kappa_min, 0.6);
  EXPECT_DOUBLE_EQ(c.gate.perplexity_max, 45);
  EXPECT_EQ(c.max_iterations, 3);
  EXPECT_DOUBLE_EQ(c.beta1, 0.3);
  ASSERT_TRUE(c.lexicon_file);
  EXPECT_EQ(c.service.bind, "0.0.0.0");
  EXPECT_EQ(c.service.port, 9090);
  EXPECT_TRUE(c.service.test_mode);
  EXPECT_EQ(c.service.bearer_token, "tok");
  EXPECT_EQ(c.service.raters_per_item, 4u);
}

TEST(RunConfig, DefaultsApplyWhenOnlyPathsGiven) {
  ConfigDir d;
  unsetenv("VERIDICAL_DATA_DIR");
  const auto c = load_run_config(d.write("data_dir = run\nkey_file = key.bin\n"));
  EXPECT_DOUBLE_EQ(c.triage.entropy_accept_max, 0.164);
  EXPECT_DOUBLE_EQ(c.triage.perplexity_accept_max, 47.824);
  EXPECT_DOUBLE_EQ(c.gate.entropy_max, 0.164);
  EXPECT_DOUBLE_EQ(c.gate.perplexity_max, 47.824);
  EXPECT_EQ(c.sample_target, 70u);
  EXPECT_FALSE(c.service.test_mode);
  EXPECT_TRUE(c.service.bearer_token.empty());
}

TEST(RunConfig, EnvironmentOverridesDataDir) {
  ConfigDir d;
  std::filesystem::create_directories(d.dir.path() / "elsewhere");
  const auto other = (d.dir.path() / "elsewhere").string();
  setenv("VERIDICAL_DATA_DIR", other.c_str(), 1);
  const auto c = load_run_config(d.write("data_dir = run\nkey_file = key.bin\n"));
  unsetenv("VERIDICAL_DATA_DIR");
  EXPECT_EQ(c.data_dir, other);
}

TEST(RunConfig, RejectsMissingPathsAndBadValues) {
  ConfigDir d;
  unsetenv("VERIDICAL_DATA_DIR");
  EXPECT_ERROR_CODE(load_run_config(d.write("data_dir = nowhere\nkey_file = key.bin\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write("data_dir = run\nkey_file = nokey\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write("data_dir = run\n")), ErrorCode::kConfigInvalid);
  const std::string base = "data_dir = run\nkey_file = key.bin\n";
  EXPECT_ERROR_CODE(load_run_config(d.write(base + "[stability]\nlexicon = gone.json\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write(base + "[triage]\nseed = abc\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write(base + "[triage]\nhc_quota_pct = 50\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write(base + "[stability]\nbeta1 = 0.9\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write(base + "[service]\ntest_mode = maybe\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write(base + "positive_class = approve\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write(base + "[gate]\nkappa_min = 2\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.write("[broken\n")), ErrorCode::kConfigInvalid);
  EXPECT_ERROR_CODE(load_run_config(d.dir.path() / "absent.conf"), ErrorCode::kNotFound);
}

TEST(Thresholds, ReadFromTopLevelOrGateSection) {
  TempDir dir;
  write_text_file(dir.path() / "a.conf", "kappa_min = 0.5\nperplexity_max = 30\n");
  auto a = load_thresholds(dir.path() / "a.conf");
  EXPECT_DOUBLE_EQ(a.kappa_min, 0.5);
  EXPECT_DOUBLE_EQ(a.perplexity_max, 30);
  EXPECT_DOUBLE_EQ(a.entropy_max, 0.164);
  write_text_file(dir.path() / "b.conf", "[gate]\nexplanation_min = 0.8\n");
  EXPECT_DOUBLE_EQ(load_thresholds(dir.path() / "b.conf").explanation_min, 0.8);
  write_text_file(dir.path() / "c.conf", "entropy_max = -1\n");
  EXPECT_ERROR_CODE(load_thresholds(dir.path() / "c.conf"), ErrorCode::kConfigInvalid);
}

}  // namespace
}  // namespace veridical
