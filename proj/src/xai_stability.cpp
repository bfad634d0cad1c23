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

#include "veridical/xai_stability.h"

#include <algorithm>
#include <optional>
#include <cctype>
#include <cmath>
#include <random>

namespace veridical {
namespace {

bool is_word_char(unsigned char c) { return std::isalpha(c) != 0; }

std::string match_case(const std::string& replacement, std::string_view original) {
  std::string out = replacement;
  const bool all_upper = std::all_of(original.begin(), original.end(),
                                     [](unsigned char c) { return std::isupper(c) != 0; });
  if (all_upper && original.size() > 1) {
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  } else if (!original.empty() && std::isupper(static_cast<unsigned char>(original.front()))) {
    out.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.front())));
  }
  return out;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

SynonymLexicon::SynonymLexicon(const std::map<std::string, std::vector<std::string>>& entries) {
  for (const auto& [word, syns] : entries) {
    const std::string w = to_lower(word);
    for (const auto& s : syns) {
      const std::string l = to_lower(s);
      if (l == w || l.empty()) continue;
      table_[w].insert(l);
      table_[l].insert(w);
    }
  }
}

SynonymLexicon SynonymLexicon::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "lexicon must be a JSON object");
  std::map<std::string, std::vector<std::string>> entries;
  for (const auto& [word, syns] : j.items()) {
    if (!syns.is_array()) throw Error(ErrorCode::kMalformedRecord, "synonyms of '" + word + "' must be an array");
    for (const auto& s : syns) {
      if (!s.is_string()) throw Error(ErrorCode::kMalformedRecord, "synonym of '" + word + "' must be a string");
      entries[word].push_back(s.get<std::string>());
    }
  }
  return SynonymLexicon(entries);
}

Json SynonymLexicon::to_json() const {
  Json j = Json::object();
  for (const auto& [word, syns] : table_) j[word] = syns;
  return j;
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
  try {
    return from_json(Json::parse(read_text_file(path)));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
}

const std::set<std::string>& SynonymLexicon::synonyms(std::string_view word) const {
  static const std::set<std::string> kNone;
  auto it = table_.find(to_lower(word));
  return it == table_.end() ? kNone : it->second;
}

PerturbationResult perturb_instance(std::string_view text, const SynonymLexicon& lexicon, double rate,
                                    std::uint64_t seed) {
  if (text.empty()) throw Error(ErrorCode::kRejectedPrecondition, "cannot perturb empty text");
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "rate must lie in (0, 1]");

  // Word spans (offset, length) of lexicon-covered words.
  std::vector<std::pair<std::size_t, std::size_t>> covered;
  for (std::size_t i = 0; i < text.size();) {
    if (!is_word_char(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
    if (lexicon.covers(text.substr(i, j - i))) covered.emplace_back(i, j - i);
    i = j;
  }

  PerturbationResult result;
  result.covered_words = covered.size();
  if (covered.empty()) {
    result.text = std::string(text);
    result.no_covered_words = true;
    return result;
  }

  const auto k = static_cast<double>(covered.size());
  const auto m = static_cast<std::size_t>(std::ceil(rate * k - 1e-9));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(covered.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::pair<std::size_t, std::string>> replacements;  // by position
  for (std::size_t i = 0; i < m; ++i) {
    const auto [pos, len] = covered[order[i]];
    const std::string_view original = text.substr(pos, len);
    const auto& syns = lexicon.synonyms(original);
    std::uniform_int_distribution<std::size_t> pick(0, syns.size() - 1);
    replacements.emplace_back(order[i], match_case(*std::next(syns.begin(), static_cast<std::ptrdiff_t>(pick(rng))), original));
  }
  std::sort(replacements.begin(), replacements.end());

  std::size_t cursor = 0;
  for (const auto& [index, word] : replacements) {
    const auto [pos, len] = covered[index];
    result.text.append(text.substr(cursor, pos - cursor));
    result.text += word;
    cursor = pos + len;
  }
  result.text.append(text.substr(cursor));
  result.substituted = m;
  return result;
}

std::vector<WordScore> normalize_max_abs(std::span<const WordScore> scores) {
  double max_abs = 0.0;
  for (const auto& ws : scores) max_abs = std::max(max_abs, std::abs(ws.score));
  std::vector<WordScore> out(scores.begin(), scores.end());
  if (max_abs > 0.0) {
    for (auto& ws : out) ws.score /= max_abs;
  }
  return out;
}

double word_shift(std::string_view word, double original_score,
                  std::span<const WordScore> perturbed_scores, const SynonymLexicon& lexicon) {
  const std::string key = to_lower(word);
  const auto& syns = lexicon.synonyms(key);
  // With several matches, the closest score is the one the word "moved" to.
  std::optional<double> shift;
  for (const auto& ws : perturbed_scores) {
    const std::string candidate = to_lower(ws.word);
    if (candidate != key && !syns.contains(candidate)) continue;
    const double d = std::abs(original_score - ws.score);
    if (!shift || d < *shift) shift = d;
  }
  return shift.value_or(std::abs(original_score));
}

double instance_stability(const SaliencyRecord& record, const SynonymLexicon& lexicon) {
  if (record.original_scores.empty() || record.perturbed_scores.empty()) {
    throw Error(ErrorCode::kEmptySaliency, record.instance_id + "/" + record.technique_id);
  }
  const auto original = normalize_max_abs(record.original_scores);
  const auto perturbed = normalize_max_abs(record.perturbed_scores);
  double total = 0.0;
  for (const auto& ws : original) total += word_shift(ws.word, ws.score, perturbed, lexicon);
  return total / static_cast<double>(original.size());
}

double stability_similarity(double mean_instability) {
  return 1.0 - std::min(1.0, mean_instability / 2.0);
}

std::map<std::string, double> combined_score(const std::map<std::string, double>& stability_means,
                                             const std::map<std::string, double>& kappas,
                                             double beta1, double beta2) {
  if (beta1 < 0.0 || beta2 < 0.0 || std::abs(beta1 + beta2 - 1.0) > 1e-9) {
    throw Error(ErrorCode::kBadWeights, "betas must be non-negative and sum to 1");
  }
  std::map<std::string, double> out;
  for (const auto& [technique, mean] : stability_means) {
    auto it = kappas.find(technique);
    if (it == kappas.end()) throw Error(ErrorCode::kMissingMetric, "no kappa for technique " + technique);
    const double kappa = std::clamp(it->second, 0.0, 1.0);
    out[technique] = std::clamp(beta1 * stability_similarity(mean) + beta2 * kappa, 0.0, 1.0);
  }
  return out;
}

StabilityReport build_stability_report(std::span<const SaliencyRecord> records,
                                       const SynonymLexicon& lexicon,
                                       const std::map<std::string, double>& kappas, double beta1,
                                       double beta2, const std::set<std::string>& sample_ids) {
  StabilityReport report;
  report.beta1 = beta1;
  report.beta2 = beta2;
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    if (!sample_ids.empty() && !sample_ids.contains(r.instance_id)) continue;
    const double e = instance_stability(r, lexicon);
    report.per_instance[{r.instance_id, r.technique_id}] = e;
    auto& [sum, count] = sums[r.technique_id];
    sum += e;
    ++count;
  }
  if (sums.empty()) throw Error(ErrorCode::kEmptySaliency, "no saliency records in scope");
  for (const auto& [technique, acc] : sums) {
    const double mean = acc.first / static_cast<double>(acc.second);
    report.mean_instability[technique] = mean;
    report.per_technique_similarity[technique] = stability_similarity(mean);
    auto it = kappas.find(technique);
    if (it != kappas.end()) report.kappas[technique] = std::clamp(it->second, 0.0, 1.0);
  }
  report.combined = combined_score(report.mean_instability, report.kappas, beta1, beta2);
  return report;
}

std::vector<std::string> rank_techniques(const StabilityReport& report) {
  std::vector<std::string> ids;
  for (const auto& [technique, _] : report.combined) ids.push_back(technique);
  auto kappa_of = [&](const std::string& t) {
    auto it = report.kappas.find(t);
    return it == report.kappas.end() ? 0.0 : it->second;
  };
  std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) {
    const double ea = report.combined.at(a);
    const double eb = report.combined.at(b);
    if (ea != eb) return ea > eb;
    if (kappa_of(a) != kappa_of(b)) return kappa_of(a) > kappa_of(b);
    return a < b;
  });
  return ids;
}

Json to_json(const StabilityReport& report) {
  Json per_instance = Json::array();
  for (const auto& [key, e] : report.per_instance) {
    per_instance.push_back({{"instance_id", key.first}, {"technique_id", key.second}, {"stability", e}});
  }
  Json techniques = Json::object();
  for (const auto& [t, e] : report.combined) {
    techniques[t] = {{"mean_instability", report.mean_instability.at(t)},
                     {"similarity", report.per_technique_similarity.at(t)},
                     {"clamped_kappa", report.kappas.at(t)},
                     {"combined", e}};
  }
  return {{"beta1", report.beta1},
          {"beta2", report.beta2},
          {"per_instance", std::move(per_instance)},
          {"techniques", std::move(techniques)},
          {"ranking", rank_techniques(report)}};
}

}  // namespace veridical
