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

#include "veridical/uncertainty.h"

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace veridical {

// High-confidence, moderately uncertain, low-confidence.
enum class Region { kHC = 0, kMC = 1, kLC = 2 };

std::string_view to_string(Region r);
Region parse_region(std::string_view s);

struct TriageConfig {
  double ppl_threshold_percentile = 25.0;
  double hc_quota_pct = 10.0;
  double mc_quota_pct = 30.0;
  double lc_quota_pct = 60.0;
  double entropy_accept_max = 0.164;
  double perplexity_accept_max = 47.824;
  std::uint64_t seed = 0;

  // Throws kInvalidConfig unless quotas are strictly increasing HC < MC < LC,
  // sum to 100, and the percentile lies in (0, 100).
  void validate() const;
};

struct RegionAssignment {
  double ppl_threshold = 0.0;
  std::map<std::string, Region> regions;
};

struct TriageResult {
  std::vector<std::pair<std::string, Region>> selected;
  std::array<std::size_t, 3> region_counts{};  // indexed by Region
};

enum class Route { kAccept, kHumanReview };
std::string_view to_string(Route r);

// Linear interpolation between closest ranks; pct in [0, 100].
double percentile(std::vector<double> values, double pct);

// Region rule with precedence LC, then MC, then HC.
Region classify(double entropy, double perplexity, double ppl_threshold);

// Errors: kEmptyInput.
RegionAssignment assign_regions(std::span<const InstanceScore> scores, const TriageConfig& config);

// Per-region targets from the quotas, largest-remainder rounded so they sum
// to `target`; remainder ties go to the more uncertain region.
std::array<std::size_t, 3> quota_counts(std::size_t target, const TriageConfig& config);

// Seeded draw without replacement inside each region. A region that cannot
// fill its count passes the shortfall to the next more uncertain region
// (LC passes back down). Errors: kTargetTooLarge.
TriageResult select_samples(const RegionAssignment& assignment, std::size_t target,
                            const TriageConfig& config);

// Inclusive thresholds: accept iff entropy <= max and perplexity <= max.
Route route_instance(const InstanceScore& score, const TriageConfig& config);

}  // namespace veridical
