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

// Per-conversion credit: backwards elimination, Shapley values, synergy and
// the expected credit of an ad over all conversion times.
//
// Ads are numbered 1..n in time order among the ads eligible at the
// conversion (see attributable_ads). A(j) is the set of the first j ads.

#ifndef MTA_ATTRIBUTION_H_
#define MTA_ATTRIBUTION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mta/error.h"
#include "mta/events.h"
#include "mta/intensity.h"

namespace mta {

inline constexpr std::string_view kCreditSchema = "mta-credit/1";
inline constexpr std::size_t kDefaultShapleyMaxAds = 15;

enum class AttributionRule { kBackwardsElimination, kShapley };
enum class Normalization { kRaw, kNormalized, kNonBaselineNormalized };

std::string_view to_string(AttributionRule rule);
std::string_view to_string(Normalization normalization);
// Throws std::invalid_argument for unknown names.
AttributionRule parse_rule(std::string_view name);
Normalization parse_normalization(std::string_view name);

// NonBaselineNormalized credit with zero total ad credit.
class DegenerateNormalization : public ModelError {
 public:
  DegenerateNormalization() : ModelError("degenerate normalization") {}
};

struct AdCredit {
  std::size_t ad_index = 0;     // 1-based
  std::size_t event_index = 0;  // into path.events
  Time t = 0.0;
  double credit = 0.0;
};

struct CreditAssignment {
  Time conversion_time = 0.0;
  AttributionRule rule = AttributionRule::kBackwardsElimination;
  Normalization normalization = Normalization::kRaw;
  bool incremental = false;
  double baseline_credit = 0.0;
  std::vector<AdCredit> ad_credits;
  // lambda(t*, A(n)) and lambda(t*, {}) before normalization.
  double full_intensity = 0.0;
  double baseline_intensity = 0.0;

  double total_ad_credit() const;
};

// m(O) = lambda(t*, O) - lambda(t*, {}).
struct SynergyReport {
  std::vector<double> marginal;  // m({A_j})
  std::vector<double> synergy;   // S(A(j-1), A_j)
};

struct AttributionConfig {
  AttributionRule rule = AttributionRule::kBackwardsElimination;
  Normalization normalization = Normalization::kNormalized;
  bool incremental = false;
  std::size_t shapley_max_ads = kDefaultShapleyMaxAds;
};

// conversion_index counts conversions in path order. Throws
// std::out_of_range for a bad index and DegenerateNormalization when
// NonBaselineNormalized meets zero total ad credit.
CreditAssignment backwards_elimination(const IntensityModel& model,
                                       const UserPath& path,
                                       std::size_t conversion_index,
                                       Normalization normalization,
                                       bool incremental = false,
                                       SynergyReport* synergy = nullptr);

// Exact Shapley values over all 2^n ad subsets. Subsets are evaluated as if
// only their ads were present, so order-dependent conditioning is
// recomputed. Throws ModelError when n exceeds max_ads.
CreditAssignment shapley(const IntensityModel& model, const UserPath& path,
                         std::size_t conversion_index,
                         Normalization normalization, bool incremental = false,
                         std::size_t max_ads = kDefaultShapleyMaxAds);

CreditAssignment attribute(const IntensityModel& model, const UserPath& path,
                           std::size_t conversion_index,
                           const AttributionConfig& config);

// S(A(j-1), A_j) = m(A(j)) - m(A(j-1)) - m({A_j}) at time t_star; 1 <= j <= n.
double synergy(const IntensityModel& model, const UserPath& path, Time t_star,
               std::size_t j, bool incremental = false);

struct ShapleySynergyShare {
  std::size_t k = 0;
  // m(all ads) - sum_j m({A_j}).
  double total_synergy = 0.0;
  // Shapley credit minus marginal, per ad.
  std::vector<double> extra_credit;
  double expected_share = 0.0;  // total_synergy / k
  double max_deviation = 0.0;
  bool consistent = false;      // max_deviation <= tolerance
};

// Meaningful when the only synergy in the model is a single k-way
// interaction among the k ads before the conversion.
ShapleySynergyShare shapley_synergy_share_check(const IntensityModel& model,
                                                const UserPath& path,
                                                std::size_t conversion_index,
                                                double tolerance = 1e-9);

// A model and a single-conversion path with k ads where
//   lambda(O) = e^alpha (1 + |O| d) + s [|O| = k],
// so every synergy sits in one k-way interaction of size s.
struct InteractionFixture {
  IntensityModel model;
  UserPath path;
};
InteractionFixture k_way_interaction_fixture(int k, double alpha, double d,
                                             double s);

// Integral over [t_j, window.end] of lambda(t, A(j)) - lambda(t, A(j-1)),
// with A(j) the first j ads of the whole path. This is the expected
// NormalizedCredit(j) summed over the conversions of the path. Step bases
// only (ModelError otherwise).
double expected_credit(const IntensityModel& model, const UserPath& path,
                       std::size_t j, bool incremental = false);

// One "mta-credit/1" record per conversion, ordered by conversion time.
// Conversions whose normalization is degenerate yield a record with no
// credits and "degenerate": true.
std::vector<std::string> credit_records(const IntensityModel& model,
                                        const UserPath& path,
                                        const AttributionConfig& config);

// credit_records over a corpus, ordered by (user_id, conversion time).
std::vector<std::string> attribute_corpus(const IntensityModel& model,
                                          std::span<const UserPath> paths,
                                          const AttributionConfig& config,
                                          int workers = 1);

}  // namespace mta

#endif  // MTA_ATTRIBUTION_H_
