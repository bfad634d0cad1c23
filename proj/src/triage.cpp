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

#include "veridical/triage.h"

#include <algorithm>
#include <cmath>
#include <random>

namespace veridical {

std::string_view to_string(Region r) {
  switch (r) {
    case Region::kHC: return "HC";
    case Region::kMC: return "MC";
    case Region::kLC: return "LC";
  }
  return "HC";
}

Region parse_region(std::string_view s) {
  if (s == "HC") return Region::kHC;
  if (s == "MC") return Region::kMC;
  if (s == "LC") return Region::kLC;
  throw Error(ErrorCode::kMalformedRecord, "unknown region '" + std::string(s) + "'");
}

std::string_view to_string(Route r) {
  return r == Route::kAccept ? "accept" : "human_review";
}

void TriageConfig::validate() const {
  if (!(ppl_threshold_percentile > 0.0 && ppl_threshold_percentile < 100.0)) {
    throw Error(ErrorCode::kInvalidConfig, "ppl_threshold_percentile must lie in (0, 100)");
  }
  if (hc_quota_pct < 0.0 || !(hc_quota_pct < mc_quota_pct && mc_quota_pct < lc_quota_pct)) {
    throw Error(ErrorCode::kInvalidConfig, "quotas must satisfy 0 <= HC% < MC% < LC%");
  }
  if (std::abs(hc_quota_pct + mc_quota_pct + lc_quota_pct - 100.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig, "quotas must sum to 100");
  }
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "percentile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Region classify(double entropy, double perplexity, double ppl_threshold) {
  const bool uncertain_ppl = perplexity >= ppl_threshold;
  if (uncertain_ppl && entropy >= 0.75 && entropy <= 1.0) return Region::kLC;
  if (uncertain_ppl && entropy > 0.25 && entropy < 0.75) return Region::kMC;
  return Region::kHC;
}

RegionAssignment assign_regions(std::span<const InstanceScore> scores, const TriageConfig& config) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "no scores to triage");
  config.validate();
  std::vector<double> ppl;
  ppl.reserve(scores.size());
  for (const auto& s : scores) ppl.push_back(s.perplexity);
  RegionAssignment out;
  out.ppl_threshold = percentile(std::move(ppl), config.ppl_threshold_percentile);
  for (const auto& s : scores) {
    out.regions[s.instance_id] = classify(s.entropy, s.perplexity, out.ppl_threshold);
  }
  return out;
}

std::array<std::size_t, 3> quota_counts(std::size_t target, const TriageConfig& config) {
  config.validate();
  const std::array<double, 3> quotas{config.hc_quota_pct, config.mc_quota_pct, config.lc_quota_pct};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t r = 0; r < 3; ++r) {
    const double exact = static_cast<double>(target) * quotas[r] / 100.0;
    // Snap values like 6.9999999999 that are integral up to rounding noise.
    const double floored = std::floor(exact + 1e-9);
    counts[r] = static_cast<std::size_t>(floored);
    remainders[r] = std::max(0.0, exact - floored);
    assigned += counts[r];
  }
  std::array<std::size_t, 3> order{2, 1, 0};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < target; i = (i + 1) % 3) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

TriageResult select_samples(const RegionAssignment& assignment, std::size_t target,
                            const TriageConfig& config) {
  if (target > assignment.regions.size()) {
    throw Error(ErrorCode::kTargetTooLarge, "target " + std::to_string(target) + " exceeds " +
                                                std::to_string(assignment.regions.size()) +
                                                " instances");
  }
  std::array<std::vector<std::string>, 3> population;
  for (const auto& [id, region] : assignment.regions) {
    population[static_cast<std::size_t>(region)].push_back(id);  // map order: sorted ids
  }

  std::array<std::size_t, 3> counts = quota_counts(target, config);
  for (std::size_t r = 0; r < 2; ++r) {
    if (counts[r] > population[r].size()) {
      counts[r + 1] += counts[r] - population[r].size();
      counts[r] = population[r].size();
    }
  }
  for (std::size_t r = 2; r > 0; --r) {
    if (counts[r] > population[r].size()) {
      counts[r - 1] += counts[r] - population[r].size();
      counts[r] = population[r].size();
    }
  }

  TriageResult result;
  std::mt19937_64 rng(config.seed);
  for (std::size_t r = 0; r < 3; ++r) {
    auto& pool = population[r];
    // Partial Fisher-Yates: the first counts[r] slots are the draw.
    for (std::size_t i = 0; i < counts[r]; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<std::string> drawn(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(counts[r]));
    std::sort(drawn.begin(), drawn.end());
    for (auto& id : drawn) result.selected.emplace_back(std::move(id), static_cast<Region>(r));
    result.region_counts[r] = counts[r];
  }
  return result;
}

Route route_instance(const InstanceScore& score, const TriageConfig& config) {
  return score.entropy <= config.entropy_accept_max && score.perplexity <= config.perplexity_accept_max
             ? Route::kAccept
             : Route::kHumanReview;
}

}  // namespace veridical
