// Copyright 2026 The MTA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mta/attribution.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "json_util.h"
#include "parallel.h"

namespace mta {
namespace {

using internal::Json;

Time conversion_time(const UserPath& path, std::size_t conversion_index) {
  std::size_t seen = 0;
  for (const Event& e : path.events) {
    if (!e.is_conversion()) continue;
    if (seen++ == conversion_index) return e.t;
  }
  throw std::out_of_range("conversion index " + std::to_string(conversion_index) +
                          " out of range for user " + path.user_id);
}

// lambda(t*, O) for ad subsets O, with the conventions shared by every rule.
class SubsetIntensity {
 public:
  SubsetIntensity(const IntensityModel& model, const UserPath& path, Time t_star,
                  bool incremental)
      : model_(model),
        path_(path),
        t_star_(t_star),
        incremental_(incremental),
        ads_(attributable_ads(path, t_star, incremental)) {}

  const std::vector<std::size_t>& ads() const { return ads_; }
  std::size_t size() const { return ads_.size(); }

  double of(std::span<const std::size_t> events) const {
    return intensity(model_, path_, t_star_, select_ads(path_, events, incremental_),
                     Limit::kRight);
  }
  double prefix(std::size_t j) const {
    return of(std::span<const std::size_t>(ads_).first(j));
  }
  double single(std::size_t j) const {
    const std::size_t event = ads_[j - 1];
    return of(std::span<const std::size_t>(&event, 1));
  }
  double mask(std::uint64_t bits) const {
    std::vector<std::size_t> events;
    for (std::size_t i = 0; i < ads_.size(); ++i) {
      if (bits >> i & 1U) events.push_back(ads_[i]);
    }
    return of(events);
  }

 private:
  const IntensityModel& model_;
  const UserPath& path_;
  Time t_star_;
  bool incremental_;
  std::vector<std::size_t> ads_;
};

CreditAssignment start_assignment(const UserPath& path,
                                  const SubsetIntensity& lambda, Time t_star,
                                  AttributionRule rule, Normalization normalization,
                                  bool incremental) {
  CreditAssignment a;
  a.conversion_time = t_star;
  a.rule = rule;
  a.normalization = normalization;
  a.incremental = incremental;
  a.baseline_intensity = lambda.prefix(0);
  a.full_intensity = lambda.prefix(lambda.size());
  for (std::size_t j = 1; j <= lambda.size(); ++j) {
    const std::size_t event = lambda.ads()[j - 1];
    a.ad_credits.push_back({j, event, path.events[event].t, 0.0});
  }
  return a;
}

void normalize(CreditAssignment& a) {
  a.baseline_credit = a.baseline_intensity;
  switch (a.normalization) {
    case Normalization::kRaw:
      return;
    case Normalization::kNormalized: {
      const double scale = a.full_intensity;
      a.baseline_credit /= scale;
      for (AdCredit& c : a.ad_credits) c.credit /= scale;
      return;
    }
    case Normalization::kNonBaselineNormalized: {
      const double scale = a.full_intensity - a.baseline_intensity;
      if (a.ad_credits.empty() ||
          std::abs(scale) <= 1e-12 * std::abs(a.full_intensity)) {
        throw DegenerateNormalization();
      }
      a.baseline_credit = 0.0;
      for (AdCredit& c : a.ad_credits) c.credit /= scale;
      return;
    }
  }
}

Json assignment_json(const std::string& user_id, const CreditAssignment& a) {
  Json credits = Json::array();
  for (const AdCredit& c : a.ad_credits) {
    credits.push_back({{"ad_index", c.ad_index}, {"t", c.t}, {"credit", c.credit}});
  }
  return Json{{"schema", kCreditSchema},
              {"user_id", user_id},
              {"t_star", a.conversion_time},
              {"rule", to_string(a.rule)},
              {"normalization", to_string(a.normalization)},
              {"incremental", a.incremental},
              {"baseline", a.baseline_credit},
              {"credits", credits}};
}

}  // namespace

std::string_view to_string(AttributionRule rule) {
  return rule == AttributionRule::kShapley ? "shapley" : "backwards_elimination";
}

std::string_view to_string(Normalization normalization) {
  switch (normalization) {
    case Normalization::kRaw:
      return "raw";
    case Normalization::kNormalized:
      return "normalized";
    case Normalization::kNonBaselineNormalized:
      return "non_baseline_normalized";
  }
  return "raw";
}

AttributionRule parse_rule(std::string_view name) {
  if (name == "backwards_elimination" || name == "be") {
    return AttributionRule::kBackwardsElimination;
  }
  if (name == "shapley") return AttributionRule::kShapley;
  throw std::invalid_argument("unknown attribution rule '" + std::string(name) + "'");
}

Normalization parse_normalization(std::string_view name) {
  if (name == "raw") return Normalization::kRaw;
  if (name == "normalized") return Normalization::kNormalized;
  if (name == "non_baseline_normalized" || name == "nonbaseline") {
    return Normalization::kNonBaselineNormalized;
  }
  throw std::invalid_argument("unknown normalization '" + std::string(name) + "'");
}

double CreditAssignment::total_ad_credit() const {
  double total = 0.0;
  for (const AdCredit& c : ad_credits) total += c.credit;
  return total;
}

CreditAssignment backwards_elimination(const IntensityModel& model,
                                       const UserPath& path,
                                       std::size_t conversion_index,
                                       Normalization normalization,
                                       bool incremental, SynergyReport* synergy) {
  const Time t_star = conversion_time(path, conversion_index);
  const SubsetIntensity lambda(model, path, t_star, incremental);
  CreditAssignment a =
      start_assignment(path, lambda, t_star, AttributionRule::kBackwardsElimination,
                       normalization, incremental);
  const std::size_t n = lambda.size();
  std::vector<double> prefix(n + 1);
  prefix[0] = a.baseline_intensity;
  for (std::size_t j = 1; j < n; ++j) prefix[j] = lambda.prefix(j);
  if (n > 0) prefix[n] = a.full_intensity;
  for (std::size_t j = 1; j <= n; ++j) {
    a.ad_credits[j - 1].credit = prefix[j] - prefix[j - 1];
  }
  if (synergy != nullptr) {
    synergy->marginal.assign(n, 0.0);
    synergy->synergy.assign(n, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
      const double m = lambda.single(j) - prefix[0];
      synergy->marginal[j - 1] = m;
      synergy->synergy[j - 1] = (prefix[j] - prefix[0]) - (prefix[j - 1] - prefix[0]) - m;
    }
  }
  normalize(a);
  return a;
}

CreditAssignment shapley(const IntensityModel& model, const UserPath& path,
                         std::size_t conversion_index,
                         Normalization normalization, bool incremental,
                         std::size_t max_ads) {
  const Time t_star = conversion_time(path, conversion_index);
  const SubsetIntensity lambda(model, path, t_star, incremental);
  const std::size_t n = lambda.size();
  if (n > max_ads || n >= 63) {
    throw ModelError("exact Shapley needs 2^" + std::to_string(n) +
                     " subset evaluations, above the cap of " + std::to_string(max_ads) +
                     " ads; raise the cap or use a sampling estimator");
  }
  CreditAssignment a = start_assignment(path, lambda, t_star, AttributionRule::kShapley,
                                        normalization, incremental);
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::vector<double> value(subsets);
  for (std::uint64_t bits = 0; bits < subsets; ++bits) value[bits] = lambda.mask(bits);

  // weight[s] = s! (n - s - 1)! / n!
  std::vector<double> weight(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 1; i <= s; ++i) {
      w *= static_cast<double>(i) / static_cast<double>(n - 1 - s + i);
    }
    weight[s] = w;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t bit = std::uint64_t{1} << j;
    double phi = 0.0;
    for (std::uint64_t bits = 0; bits < subsets; ++bits) {
      if (bits & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(bits));
      phi += weight[size] * (value[bits | bit] - value[bits]);
    }
    a.ad_credits[j].credit = phi;
  }
  normalize(a);
  return a;
}

CreditAssignment attribute(const IntensityModel& model, const UserPath& path,
                           std::size_t conversion_index,
                           const AttributionConfig& config) {
  if (config.rule == AttributionRule::kShapley) {
    return shapley(model, path, conversion_index, config.normalization,
                   config.incremental, config.shapley_max_ads);
  }
  return backwards_elimination(model, path, conversion_index, config.normalization,
                               config.incremental);
}

double synergy(const IntensityModel& model, const UserPath& path, Time t_star,
               std::size_t j, bool incremental) {
  const SubsetIntensity lambda(model, path, t_star, incremental);
  if (j < 1 || j > lambda.size()) {
    throw std::out_of_range("synergy: ad index " + std::to_string(j) + " out of range");
  }
  const double base = lambda.prefix(0);
  const double m_prefix = lambda.prefix(j) - base;
  const double m_previous = lambda.prefix(j - 1) - base;
  const double m_single = lambda.single(j) - base;
  return m_prefix - m_previous - m_single;
}

ShapleySynergyShare shapley_synergy_share_check(const IntensityModel& model,
                                                const UserPath& path,
                                                std::size_t conversion_index,
                                                double tolerance) {
  const Time t_star = conversion_time(path, conversion_index);
  const SubsetIntensity lambda(model, path, t_star, false);
  const CreditAssignment phi =
      shapley(model, path, conversion_index, Normalization::kRaw, false);
  ShapleySynergyShare out;
  out.k = lambda.size();
  const double base = phi.baseline_intensity;
  double marginal_sum = 0.0;
  std::vector<double> marginal(out.k);
  for (std::size_t j = 1; j <= out.k; ++j) {
    marginal[j - 1] = lambda.single(j) - base;
    marginal_sum += marginal[j - 1];
  }
  out.total_synergy = (phi.full_intensity - base) - marginal_sum;
  out.expected_share = out.k == 0 ? 0.0 : out.total_synergy / static_cast<double>(out.k);
  for (std::size_t j = 0; j < out.k; ++j) {
    const double extra = phi.ad_credits[j].credit - marginal[j];
    out.extra_credit.push_back(extra);
    out.max_deviation = std::max(out.max_deviation, std::abs(extra - out.expected_share));
  }
  out.consistent = out.max_deviation <= tolerance;
  return out;
}

InteractionFixture k_way_interaction_fixture(int k, double alpha, double d,
                                             double s) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  InteractionFixture f;
  TermSpec term;
  term.name = "ad";
  term.applies_to = EffectKind::kAd;
  term.basis.kind = StepBasis{{10.0}};
  term.conditioning = conditioning::ExactCount{{}, k};
  f.model.spec.terms.push_back(term);
  f.model.coefficients[CoefficientKey::intercept()] = alpha;
  for (int c = 1; c <= k; ++c) {
    double ratio = 1.0 + c * d;
    if (c == k) ratio += s / std::exp(alpha);
    if (!(ratio > 0.0)) throw std::invalid_argument("interaction makes the intensity non-positive");
    f.model.coefficients[CoefficientKey::term("ad", 0, c)] = std::log(ratio);
  }
  f.path.user_id = "fixture";
  f.path.window = {0.0, 10.0};
  for (int i = 0; i < k; ++i) {
    f.path.events.push_back({EventKind::kAdQuery, 1.0 + i, true, {{"slot", std::to_string(i)}}});
  }
  f.path.events.push_back({EventKind::kConversion, 9.0, true, {}});
  return f;
}

double expected_credit(const IntensityModel& model, const UserPath& path,
                       std::size_t j, bool incremental) {
  if (!model.spec.is_piecewise_constant()) {
    throw ModelError("expected_credit requires a piecewise-constant (step) basis");
  }
  const std::vector<std::size_t> ads = attributable_ads(path, path.window.end, incremental);
  if (j < 1 || j > ads.size()) {
    throw std::out_of_range("expected_credit: ad index " + std::to_string(j) +
                            " out of range");
  }
  const Time from = path.events[ads[j - 1]].t;
  const Time to = path.window.end;
  std::vector<double> offsets{0.0};
  for (const TermSpec& term : model.spec.terms) {
    const auto& b = std::get<StepBasis>(term.basis.kind).boundaries;
    offsets.insert(offsets.end(), b.begin(), b.end());
  }
  std::vector<Time> cuts{from, to};
  for (const Event& e : path.events) {
    if (!e.is_query()) continue;
    for (double b : offsets) {
      const Time c = e.t + b;
      if (c > from && c < to) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::span<const std::size_t> all(ads);
  const EventSelection with = select_ads(path, all.first(j), incremental);
  const EventSelection without = select_ads(path, all.first(j - 1), incremental);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Time mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const double diff = intensity(model, path, mid, with, Limit::kLeft) -
                        intensity(model, path, mid, without, Limit::kLeft);
    total += diff * (cuts[i + 1] - cuts[i]);
  }
  return total;
}

std::vector<std::string> credit_records(const IntensityModel& model,
                                        const UserPath& path,
                                        const AttributionConfig& config) {
  std::vector<std::string> out;
  const std::size_t conversions = conversion_count(path);
  for (std::size_t c = 0; c < conversions; ++c) {
    try {
      out.push_back(assignment_json(path.user_id, attribute(model, path, c, config)).dump());
    } catch (const DegenerateNormalization&) {
      CreditAssignment empty;
      empty.conversion_time = conversion_time(path, c);
      empty.rule = config.rule;
      empty.normalization = config.normalization;
      empty.incremental = config.incremental;
      Json record = assignment_json(path.user_id, empty);
      record["baseline"] = nullptr;
      record["degenerate"] = true;
      out.push_back(record.dump());
    }
  }
  return out;
}

std::vector<std::string> attribute_corpus(const IntensityModel& model,
                                          std::span<const UserPath> paths,
                                          const AttributionConfig& config,
                                          int workers) {
  std::vector<std::size_t> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return paths[a].user_id < paths[b].user_id;
  });
  std::vector<std::vector<std::string>> per_path(paths.size());
  internal::parallel_for(paths.size(), workers, [&](std::size_t i) {
    per_path[i] = credit_records(model, paths[order[i]], config);
  });
  std::vector<std::string> out;
  for (auto& records : per_path) {
    for (auto& r : records) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mta
