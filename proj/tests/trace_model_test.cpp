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

#include "veridical/trace_model.h"

#include "test_util.h"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace veridical {
namespace {

using testing::TempDir;

std::string trace_line(const std::string& id, const std::string& probs, const std::string& predicted) {
  return R"({"decision_probs":)" + probs + R"(,"instance_id":")" + id +
         R"(","model_id":"m","predicted_class":")" + predicted +
         R"(","prompt_text":"p","response_text":"r","token_logprobs":[{"logprob":-0.5,"token":"r"}]})";
}

double normalized_binary_entropy(double p) {
  auto t = [](double x) { return x <= 0 ? 0.0 : -x * std::log2(x); };
  return t(p) + t(1 - p);
}

TEST(TraceModel, TieBreaksLexicographically) {
  std::istringstream in(trace_line("a", R"({"fund":0.5,"reject":0.5})", "fund"));
  auto result = parse_traces_lenient(in);
  ASSERT_TRUE(result.errors.empty()) << result.errors.front().message;
  ASSERT_EQ(result.records.size(), 1u);
  EXPECT_EQ(result.records[0].predicted_class, "fund");

  std::istringstream bad(trace_line("a", R"({"fund":0.5,"reject":0.5})", "reject"));
  auto rejected = parse_traces_lenient(bad);
  ASSERT_EQ(rejected.errors.size(), 1u);
  EXPECT_EQ(rejected.errors[0].code, ErrorCode::kMalformedRecord);
}

TEST(TraceModel, UnnormalizedProbabilitiesRejected) {
  TempDir dir;
  write_text_file(dir.path() / "t.jsonl", trace_line("a", R"({"fund":0.6,"reject":0.3})", "fund") + "\n");
  EXPECT_ERROR_CODE(parse_trace_file(dir.path() / "t.jsonl"), ErrorCode::kProbabilityNotNormalized);
}

TEST(TraceModel, DuplicateInstanceIdRejected) {
  std::string line = trace_line("dup", R"({"fund":0.7,"reject":0.3})", "fund");
  std::istringstream in(line + "\n" + line + "\n");
  auto result = parse_traces_lenient(in);
  EXPECT_EQ(result.records.size(), 1u);
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].code, ErrorCode::kDuplicateInstanceId);
  EXPECT_EQ(result.errors[0].line, 2u);
}

TEST(TraceModel, MalformedRecordCarriesLineNumber) {
  std::istringstream in(trace_line("a", R"({"fund":0.7,"reject":0.3})", "fund") + "\n{not json\n");
  try {
    auto result = parse_traces_lenient(in);
    ASSERT_EQ(result.errors.size(), 1u);
    EXPECT_EQ(result.errors[0].line, 2u);
  } catch (...) {
    FAIL() << "lenient parse must not throw";
  }
  TempDir dir;
  write_text_file(dir.path() / "t.jsonl", "{\"instance_id\":\"x\"}\n");
  try {
    parse_trace_file(dir.path() / "t.jsonl");
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(TraceModel, PositiveLogprobRejected) {
  std::string line = trace_line("a", R"({"fund":0.7,"reject":0.3})", "fund");
  line.replace(line.find("-0.5"), 4, "0.5");
  std::istringstream in(line);
  auto result = parse_traces_lenient(in);
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].code, ErrorCode::kMalformedRecord);
}

TEST(TraceModel, ParsingNeverDropsRecords) {
  auto traces = generate_fixtures(11, 40);
  std::string text = to_jsonl(std::span<const DecisionTrace>(traces));
  // Corrupt a handful of lines in different ways.
  std::istringstream split(text);
  std::string line;
  std::string corrupted;
  int i = 0;
  while (std::getline(split, line)) {
    if (i % 7 == 3) line = line.substr(0, line.size() / 2);
    if (i % 11 == 5) line.replace(line.find("\"fund\":"), 7, "\"fund\":0.0001,\"x\":");
    corrupted += line + "\n";
    ++i;
  }
  std::istringstream in(corrupted);
  auto result = parse_traces_lenient(in);
  EXPECT_EQ(result.lines_read, 40u);
  EXPECT_EQ(result.records.size() + result.errors.size(), result.lines_read);
  EXPECT_GT(result.errors.size(), 0u);
}

TEST(TraceModel, FixtureRoundTripIsBitIdentical) {
  TempDir dir;
  auto traces = generate_fixtures(3, 10);
  write_jsonl(dir.path() / "traces.jsonl", std::span<const DecisionTrace>(traces));
  std::string first = read_text_file(dir.path() / "traces.jsonl");
  auto parsed = parse_trace_file(dir.path() / "traces.jsonl");
  ASSERT_EQ(parsed.size(), 10u);
  EXPECT_EQ(parsed, traces);
  EXPECT_EQ(to_jsonl(std::span<const DecisionTrace>(parsed)), first);
}

TEST(TraceModel, NonCanonicalInputReserializesCanonically) {
  std::string loose = R"({ "token_logprobs": [ {"token":"a", "logprob": -1.50} ], "prompt_text":"p",)"
                      R"( "model_id":"m", "instance_id":"x", "response_text":"r", "predicted_class":"fund",)"
                      R"( "decision_probs": {"reject": 0.25, "fund": 0.75} })";
  std::istringstream in(loose);
  auto result = parse_traces_lenient(in);
  ASSERT_EQ(result.records.size(), 1u);
  std::string canon = canonical_dump(to_json(result.records[0]));
  EXPECT_EQ(canon,
            R"({"decision_probs":{"fund":0.75,"reject":0.25},"instance_id":"x","model_id":"m",)"
            R"("predicted_class":"fund","prompt_text":"p","response_text":"r",)"
            R"("token_logprobs":[{"logprob":-1.5,"token":"a"}]})");
  std::istringstream again(canon);
  auto reparsed = parse_traces_lenient(again);
  EXPECT_EQ(canonical_dump(to_json(reparsed.records[0])), canon);
}

TEST(Fixtures, DeterministicForSeed) {
  EXPECT_EQ(generate_fixtures(7, 3), generate_fixtures(7, 3));
  EXPECT_NE(generate_fixtures(7, 3), generate_fixtures(8, 3));
}

TEST(Fixtures, ZeroCountRejected) {
  EXPECT_ERROR_CODE(generate_fixtures(7, 0), ErrorCode::kRejectedPrecondition);
}

TEST(Fixtures, EntropySpansUnitIntervalAndAllRegions) {
  auto traces = generate_fixtures(7, 1200);
  std::vector<double> entropy;
  std::vector<double> ppl;
  for (const auto& t : traces) {
    validate(t);
    entropy.push_back(normalized_binary_entropy(t.decision_probs.at("fund")));
    double nll = 0;
    for (const auto& tok : t.token_logprobs) nll -= tok.logprob;
    ppl.push_back(std::exp(nll / static_cast<double>(t.token_logprobs.size())));
    EXPECT_NE(t.prompt_text.find("Balance Sheet"), std::string::npos);
  }
  EXPECT_NEAR(*std::min_element(entropy.begin(), entropy.end()), 0.0, 1e-9);
  EXPECT_NEAR(*std::max_element(entropy.begin(), entropy.end()), 1.0, 1e-9);
  // Scan with the region rules directly: 25th percentile threshold, LC/MC
  // need ppl >= threshold, HC takes everything else.
  std::vector<double> sorted = ppl;
  std::sort(sorted.begin(), sorted.end());
  double pos = 0.25 * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  double thr = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
  int hc = 0, mc = 0, lc = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (entropy[i] >= 0.75 && ppl[i] >= thr) {
      ++lc;
    } else if (entropy[i] > 0.25 && entropy[i] < 0.75 && ppl[i] >= thr) {
      ++mc;
    } else {
      ++hc;
    }
  }
  EXPECT_GT(hc, 0);
  EXPECT_GT(mc, 0);
  EXPECT_GT(lc, 0);
}

TEST(Annotations, DuplicatePairRejectedAndUnknownCategory) {
  AnnotationRecord a{"s1", "E1", Judgment::kAgree, {{"SHAP", Quality::kGood}}, Timestamp{0}, std::nullopt};
  std::string line = canonical_dump(to_json(a));
  std::istringstream in(line + "\n" + line + "\n");
  auto result = parse_annotations_lenient(in);
  ASSERT_EQ(result.errors.size(), 1u);
  EXPECT_EQ(result.errors[0].code, ErrorCode::kDuplicateAnnotation);

  std::string bad = line;
  bad.replace(bad.find("good"), 4, "great");
  std::istringstream in2(bad);
  auto r2 = parse_annotations_lenient(in2);
  ASSERT_EQ(r2.errors.size(), 1u);
  EXPECT_EQ(r2.errors[0].code, ErrorCode::kUnknownCategory);
}

TEST(Labels, LabelOutsideSetRejected) {
  std::istringstream in(R"({"instance_id":"a","true_class":"maybe"})");
  auto r = parse_labels_lenient(in, {"fund", "reject"});
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, ErrorCode::kUnknownCategory);
}

TEST(Timestamps, RoundTrip) {
  Timestamp t{1728950400123};
  EXPECT_EQ(t.to_string(), "2024-10-15T00:00:00.123Z");
  EXPECT_EQ(Timestamp::parse(t.to_string()), t);
  EXPECT_EQ(Timestamp::parse("2024-10-15T00:00:00Z").unix_ms, 1728950400000);
}

}  // namespace
}  // namespace veridical
