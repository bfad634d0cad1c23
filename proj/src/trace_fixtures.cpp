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

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace veridical {
namespace {

double binary_entropy_bits(double p) {
  auto term = [](double x) { return x <= 0.0 ? 0.0 : -x * std::log2(x); };
  return term(p) + term(1.0 - p);
}

// p in [0.5, 1] with H2(p) = h.
double invert_binary_entropy(double h) {
  double lo = 0.5;
  double hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    if (binary_entropy_bits(mid) > h) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string dollars(std::mt19937_64& rng, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  int v = dist(rng);
  std::string digits = std::to_string(v);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  std::reverse(out.begin(), out.end());
  return "$" + out;
}

std::string balance_sheet_prompt(std::mt19937_64& rng) {
  static constexpr const char* kMonths[] = {"March 31", "June 30", "September 30", "December 31"};
  std::uniform_int_distribution<int> month(0, 3);
  std::uniform_int_distribution<int> year(2021, 2024);
  std::ostringstream s;
  s << "Balance Sheet as of " << kMonths[month(rng)] << ", " << year(rng)
    << ", Status: Audited. Assets include: Current Assets, with cash of " << dollars(rng, 1000, 90000)
    << ", accounts receivable of " << dollars(rng, 5000, 120000)
    << ", and deposits and prepaid expenses of " << dollars(rng, 500, 9000)
    << ". Inventory holds significant value at " << dollars(rng, 10000, 250000)
    << ". Total current assets amount to " << dollars(rng, 50000, 400000)
    << ". Fixed assets include property, plant, and equipment valued at "
    << dollars(rng, 10000, 150000) << ", less accumulated depreciation of "
    << dollars(rng, 1000, 30000) << ". Total assets accumulate to " << dollars(rng, 80000, 600000)
    << ". Liabilities consist of: Current Liabilities, with accounts payable of "
    << dollars(rng, 2000, 60000) << " and accrued expenses of " << dollars(rng, 1000, 20000)
    << ". Deferred tax liabilities are noted at " << dollars(rng, 0, 9000)
    << ". Total liabilities are " << dollars(rng, 20000, 400000)
    << ". The total of liabilities and equity matches total assets, confirming the balance sheet "
       "integrity.";
  return s.str();
}

std::string response_for(const std::string& decision, double confidence, std::mt19937_64& rng) {
  static constexpr const char* kFund[] = {
      "current assets comfortably cover current liabilities",
      "inventory and receivables provide adequate collateral",
      "the audited statement shows stable equity",
      "liquidity ratios support repayment of the requested amount",
  };
  static constexpr const char* kReject[] = {
      "total liabilities are high relative to total assets",
      "contingent liabilities create material repayment risk",
      "cash reserves are thin against accounts payable",
      "leverage exceeds the underwriting policy limit",
  };
  const auto& pool = decision == "fund" ? kFund : kReject;
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_int_distribution<int> count(2, 4);
  std::ostringstream s;
  s << "Decision: " << decision << ". Confidence is "
    << (confidence > 0.9 ? "high" : confidence > 0.7 ? "moderate" : "low") << " because";
  int n = count(rng);
  for (int i = 0; i < n; ++i) s << (i == 0 ? " " : " and ") << pool[pick(rng)];
  s << ".";
  return s.str();
}

}  // namespace

std::vector<DecisionTrace> generate_fixtures(std::uint64_t seed, std::size_t n,
                                             const std::string& model_id) {
  if (n == 0) throw Error(ErrorCode::kRejectedPrecondition, "fixture count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Stratified uncertainty levels guarantee coverage of [0, 1]; the two
  // extremes are pinned so degenerate and uniform distributions always occur.
  std::vector<double> levels(n);
  for (std::size_t i = 0; i < n; ++i) levels[i] = (static_cast<double>(i) + unit(rng)) / static_cast<double>(n);
  levels.front() = 0.0;
  if (n > 1) levels.back() = 1.0;
  std::shuffle(levels.begin(), levels.end(), rng);

  std::vector<DecisionTrace> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = levels[i];
    DecisionTrace t;
    char id[32];
    std::snprintf(id, sizeof(id), "inst-%06zu", i + 1);
    t.instance_id = id;
    t.model_id = model_id;
    t.prompt_text = balance_sheet_prompt(rng);

    double p_major = round_decimal(invert_binary_entropy(u));
    double p_minor = round_decimal(1.0 - p_major);
    bool fund_major = unit(rng) < 0.55;
    t.decision_probs["fund"] = fund_major ? p_major : p_minor;
    t.decision_probs["reject"] = fund_major ? p_minor : p_major;
    t.predicted_class = argmax_class(t.decision_probs);
    t.response_text = response_for(t.predicted_class, p_major, rng);

    // Perplexity rises with uncertainty, with enough noise that the two
    // measures are not redundant.
    double mix = std::clamp(0.7 * u + 0.3 * unit(rng), 0.0, 1.0);
    double mean_nll = std::log(3.0) + (std::log(150.0) - std::log(3.0)) * mix;
    std::gamma_distribution<double> nll(4.0, mean_nll / 4.0);
    std::istringstream words(t.response_text);
    std::string word;
    while (words >> word) {
      t.token_logprobs.push_back({word, -round_decimal(nll(rng))});
    }
    for (auto& tok : t.token_logprobs) {
      if (tok.logprob == 0.0) tok.logprob = 0.0;  // no negative zero in output
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace veridical
