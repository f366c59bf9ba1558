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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "mta/attribution.h"
#include "mta/error.h"
#include "mta/simulator.h"
#include "test_support.h"

namespace mta {
namespace {

using testing::ad;
using testing::conversion;
using testing::damped_two_ad_model;
using testing::decaying_model;
using testing::feature_is;
using testing::make_path;
using testing::step_term;
using testing::two_ad_model;
using testing::two_ad_path;

// lambda at t* with only the given events' effects, evaluated independently
// of the attribution code.
double lambda_of(const IntensityModel& m, const UserPath& p, Time t,
                 std::vector<std::size_t> events, bool incremental = false) {
  std::sort(events.begin(), events.end());
  return intensity(m, p, t, select_ads(p, events, incremental), Limit::kRight);
}

// Shapley values by averaging marginal contributions over all orderings.
std::vector<double> permutation_shapley(const IntensityModel& m, const UserPath& p, Time t,
                                        const std::vector<std::size_t>& ads) {
  std::vector<std::size_t> order(ads.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(ads.size(), 0.0);
  double orderings = 0.0;
  do {
    std::vector<std::size_t> present;
    double before = lambda_of(m, p, t, present);
    for (std::size_t i : order) {
      present.push_back(ads[i]);
      const double after = lambda_of(m, p, t, present);
      phi[i] += after - before;
      before = after;
    }
    orderings += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= orderings;
  return phi;
}

std::vector<double> credits(const CreditAssignment& c) {
  std::vector<double> out;
  for (const AdCredit& a : c.ad_credits) out.push_back(a.credit);
  return out;
}

IntensityModel three_ad_model() {
  IntensityModel m = two_ad_model();
  m.spec.terms.push_back(step_term("a3", {30.0}, feature_is("id", "3")));
  m.coefficients[CoefficientKey::term("a3", 0)] = std::log(4.0);
  return m;
}

UserPath three_ad_path() {
  return make_path({ad(1.0, {{"id", "1"}}), ad(1.3, {{"id", "2"}}), ad(1.6, {{"id", "3"}}),
                    conversion(2.0)});
}

// Decaying model with an extra damping term on repeats; random paths with
// several ads and conversions.
IntensityModel busy_model() {
  IntensityModel m = decaying_model();
  m.spec.terms.push_back(step_term("repeat", {0.5, 30.0}, conditioning::PrecededWithin{2.0}));
  m.coefficients[CoefficientKey::term("repeat", 0)] = -0.4;
  m.coefficients[CoefficientKey::term("repeat", 1)] = 0.1;
  return m;
}

std::vector<UserPath> busy_paths(std::size_t n, std::uint64_t seed) {
  std::vector<UserPath> out;
  std::uniform_real_distribution<double> when(0.0, 30.0);
  std::uniform_int_distribution<int> count(0, 6);
  const IntensityModel m = busy_model();
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = rng_stream(seed, 1, i);
    std::vector<Event> events;
    for (int a = count(rng); a > 0; --a) events.push_back(ad(when(rng)));
    events.push_back(conversion(when(rng)));
    UserPath p = make_path(events, 30.0, "p" + std::to_string(i));
    simulate_conversions(m, p, rng);
    out.push_back(std::move(p));
  }
  return out;
}

TEST(BackwardsElimination, TwoAdExampleRawCredit) {
  const CreditAssignment c =
      backwards_elimination(two_ad_model(), two_ad_path(), 0, Normalization::kRaw);
  ASSERT_EQ(c.ad_credits.size(), 2u);
  EXPECT_NEAR(c.ad_credits[0].credit, 1.0, 1e-12);
  EXPECT_NEAR(c.ad_credits[1].credit, 4.0, 1e-12);
  EXPECT_NEAR(c.baseline_credit, 1.0, 1e-12);
  EXPECT_NEAR(c.full_intensity, 6.0, 1e-12);
  EXPECT_EQ(c.ad_credits[0].ad_index, 1u);
  EXPECT_EQ(c.ad_credits[1].event_index, 1u);
  EXPECT_DOUBLE_EQ(c.ad_credits[1].t, 1.5);
}

TEST(BackwardsElimination, TwoAdExampleNormalized) {
  const CreditAssignment c =
      backwards_elimination(two_ad_model(), two_ad_path(), 0, Normalization::kNormalized);
  EXPECT_NEAR(c.ad_credits[0].credit, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(c.ad_credits[1].credit, 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(c.baseline_credit, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(c.baseline_credit + c.total_ad_credit(), 1.0, 1e-12);
}

TEST(BackwardsElimination, NonBaselineNormalizedSumsToOne) {
  const CreditAssignment c = backwards_elimination(two_ad_model(), two_ad_path(), 0,
                                                   Normalization::kNonBaselineNormalized);
  EXPECT_NEAR(c.ad_credits[0].credit, 0.2, 1e-12);
  EXPECT_NEAR(c.ad_credits[1].credit, 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(c.baseline_credit, 0.0);
}

TEST(BackwardsElimination, NegativeSynergyVariant) {
  const CreditAssignment c =
      backwards_elimination(damped_two_ad_model(), two_ad_path(), 0, Normalization::kRaw);
  EXPECT_NEAR(c.ad_credits[0].credit, 1.0, 1e-12);
  EXPECT_NEAR(c.ad_credits[1].credit, 1.0, 1e-12);
  EXPECT_NEAR(c.full_intensity, 3.0, 1e-12);
}

TEST(BackwardsElimination, NoAdsGivesEverythingToBaseline) {
  const UserPath p = make_path({conversion(4.0), ad(5.0)});
  const CreditAssignment c = backwards_elimination(decaying_model(), p, 0, Normalization::kNormalized);
  EXPECT_TRUE(c.ad_credits.empty());
  EXPECT_DOUBLE_EQ(c.baseline_credit, 1.0);
  const CreditAssignment raw = backwards_elimination(decaying_model(), p, 0, Normalization::kRaw);
  EXPECT_NEAR(raw.baseline_credit, 1.0 / 30.0, 1e-15);
  EXPECT_THROW(
      backwards_elimination(decaying_model(), p, 0, Normalization::kNonBaselineNormalized),
      DegenerateNormalization);
}

TEST(BackwardsElimination, ZeroEffectIsDegenerateUnderNonBaseline) {
  IntensityModel m = two_ad_model();
  m.coefficients[CoefficientKey::term("a1", 0)] = 0.0;
  m.coefficients[CoefficientKey::term("a2", 0)] = 0.0;
  try {
    backwards_elimination(m, two_ad_path(), 0, Normalization::kNonBaselineNormalized);
    FAIL() << "expected DegenerateNormalization";
  } catch (const ModelError& e) {
    EXPECT_STREQ(e.what(), "degenerate normalization");
  }
}

TEST(BackwardsElimination, ConversionIndexOutOfRange) {
  EXPECT_THROW(backwards_elimination(two_ad_model(), two_ad_path(), 1, Normalization::kRaw),
               std::out_of_range);
}

TEST(BackwardsElimination, AdAtTheConversionInstantCounts) {
  const UserPath p = make_path({ad(3.0), conversion(3.0)});
  const CreditAssignment c = backwards_elimination(decaying_model(), p, 0, Normalization::kRaw);
  ASSERT_EQ(c.ad_credits.size(), 1u);
  EXPECT_NEAR(c.ad_credits[0].credit, 1.0 / 30.0, 1e-15);
}

TEST(BackwardsElimination, TelescopesAndKeepsEarlierSetsMarginal) {
  const IntensityModel m = busy_model();
  for (const UserPath& p : busy_paths(300, 9)) {
    const auto times = conversion_times(p);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const CreditAssignment c = backwards_elimination(m, p, k, Normalization::kRaw);
      const double full = c.full_intensity;
      EXPECT_NEAR(c.baseline_credit + c.total_ad_credit(), full, 1e-9 * full);
      const auto ads = attributable_ads(p, times[k], false);
      ASSERT_EQ(ads.size(), c.ad_credits.size());
      double retained = 0.0;
      for (std::size_t j = 0; j < ads.size(); ++j) {
        const std::vector<std::size_t> prefix(ads.begin(), ads.begin() + static_cast<long>(j));
        const double m_prefix = lambda_of(m, p, times[k], prefix) - c.baseline_credit;
        EXPECT_NEAR(retained, m_prefix, 1e-12);
        retained += c.ad_credits[j].credit;
      }
    }
  }
}

TEST(BackwardsElimination, SynergyReportMatchesDefinition) {
  SynergyReport report;
  backwards_elimination(two_ad_model(), two_ad_path(), 0, Normalization::kRaw, false, &report);
  EXPECT_NEAR(report.marginal[0], 1.0, 1e-12);
  EXPECT_NEAR(report.marginal[1], 2.0, 1e-12);
  EXPECT_NEAR(report.synergy[0], 0.0, 1e-12);
  EXPECT_NEAR(report.synergy[1], 2.0, 1e-12);
}

TEST(Synergy, TwoAdExamples) {
  EXPECT_NEAR(synergy(two_ad_model(), two_ad_path(), 2.0, 2), 2.0, 1e-12);
  EXPECT_NEAR(synergy(damped_two_ad_model(), two_ad_path(), 2.0, 2), -1.0, 1e-12);
  EXPECT_NEAR(synergy(two_ad_model(), two_ad_path(), 2.0, 1), 0.0, 1e-12);
}

TEST(Synergy, MultiplicativeClosedForm) {
  // (e^f1 - 1)(e^f2 - 1) scaled by the baseline.
  IntensityModel m = two_ad_model();
  for (double f1 : {-0.7, 0.2, 1.3}) {
    for (double f2 : {-0.3, 0.5}) {
      m.coefficients[CoefficientKey::term("a1", 0)] = f1;
      m.coefficients[CoefficientKey::term("a2", 0)] = f2;
      EXPECT_NEAR(synergy(m, two_ad_path(), 2.0, 2), std::expm1(f1) * std::expm1(f2), 1e-12);
    }
  }
}

TEST(Synergy, IndexOutOfRange) {
  EXPECT_THROW(synergy(two_ad_model(), two_ad_path(), 2.0, 0), std::out_of_range);
  EXPECT_THROW(synergy(two_ad_model(), two_ad_path(), 2.0, 3), std::out_of_range);
}

TEST(Shapley, TwoAdExample) {
  const CreditAssignment c = shapley(two_ad_model(), two_ad_path(), 0, Normalization::kRaw);
  ASSERT_EQ(c.ad_credits.size(), 2u);
  EXPECT_NEAR(c.ad_credits[0].credit, 2.0, 1e-12);
  EXPECT_NEAR(c.ad_credits[1].credit, 3.0, 1e-12);
  EXPECT_EQ(c.rule, AttributionRule::kShapley);
}

TEST(Shapley, SingleAdEqualsBackwardsElimination) {
  const UserPath p = make_path({ad(3.0), conversion(3.5)});
  for (Normalization n : {Normalization::kRaw, Normalization::kNormalized,
                          Normalization::kNonBaselineNormalized}) {
    const auto s = shapley(decaying_model(), p, 0, n);
    const auto b = backwards_elimination(decaying_model(), p, 0, n);
    EXPECT_NEAR(s.ad_credits[0].credit, b.ad_credits[0].credit, 1e-15);
    EXPECT_NEAR(s.baseline_credit, b.baseline_credit, 1e-15);
  }
}

TEST(Shapley, ThreeAdsMatchPermutationAverage) {
  const IntensityModel m = three_ad_model();
  const UserPath p = three_ad_path();
  const auto phi = credits(shapley(m, p, 0, Normalization::kRaw));
  const auto oracle = permutation_shapley(m, p, 2.0, {0, 1, 2});
  ASSERT_EQ(phi.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(phi[i], oracle[i], 1e-12);
}

TEST(Shapley, OrderDependentModelMatchesPermutationAverage) {
  const IntensityModel m = busy_model();
  int checked = 0;
  for (const UserPath& p : busy_paths(80, 31)) {
    const auto times = conversion_times(p);
    const auto ads = attributable_ads(p, times[0], false);
    if (ads.size() < 2 || ads.size() > 6) continue;
    const auto phi = credits(shapley(m, p, 0, Normalization::kRaw));
    const auto oracle = permutation_shapley(m, p, times[0], ads);
    for (std::size_t i = 0; i < ads.size(); ++i) EXPECT_NEAR(phi[i], oracle[i], 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Shapley, EfficiencyEqualsBackwardsEliminationTotal) {
  const IntensityModel m = busy_model();
  for (const UserPath& p : busy_paths(200, 17)) {
    for (std::size_t k = 0; k < conversion_count(p); ++k) {
      const auto s = shapley(m, p, k, Normalization::kRaw);
      const auto b = backwards_elimination(m, p, k, Normalization::kRaw);
      EXPECT_NEAR(s.total_ad_credit(), b.total_ad_credit(), 1e-9 * s.full_intensity);
      EXPECT_NEAR(s.total_ad_credit(), s.full_intensity - s.baseline_intensity,
                  1e-9 * s.full_intensity);
    }
  }
}

TEST(Shapley, SymmetricAdsShareEqually) {
  // Two identical ads at the same instant are interchangeable.
  const UserPath p = make_path({ad(2.0), ad(2.0), conversion(2.5)});
  const auto phi = credits(shapley(decaying_model(), p, 0, Normalization::kRaw));
  ASSERT_EQ(phi.size(), 2u);
  EXPECT_NEAR(phi[0], phi[1], 1e-15);
}

TEST(Shapley, NullAdGetsNothing) {
  IntensityModel m = three_ad_model();
  m.coefficients[CoefficientKey::term("a2", 0)] = 0.0;
  const auto phi = credits(shapley(m, three_ad_path(), 0, Normalization::kRaw));
  EXPECT_NEAR(phi[1], 0.0, 1e-12);
}

TEST(Shapley, CapIsEnforced) {
  std::vector<Event> events;
  for (int i = 0; i < 5; ++i) events.push_back(ad(1.0 + i));
  events.push_back(conversion(10.0));
  const UserPath p = make_path(events);
  try {
    shapley(decaying_model(), p, 0, Normalization::kRaw, false, 4);
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("sampling"), std::string::npos);
  }
  EXPECT_NO_THROW(shapley(decaying_model(), p, 0, Normalization::kRaw, false, 5));
}

TEST(ShapleySynergyShare, SplitsTheInteractionEvenly) {
  for (int k : {1, 2, 3, 4}) {
    const auto f = k_way_interaction_fixture(k, std::log(0.5), 0.3, 1.7);
    const ShapleySynergyShare r = shapley_synergy_share_check(f.model, f.path, 0);
    EXPECT_EQ(r.k, static_cast<std::size_t>(k));
    EXPECT_TRUE(r.consistent) << "k=" << k << " deviation " << r.max_deviation;
    const double expected = k == 1 ? 0.0 : 1.7 / k;
    for (double extra : r.extra_credit) EXPECT_NEAR(extra, expected, 1e-9);
    // Independent check of the Shapley values themselves.
    std::vector<std::size_t> ads(static_cast<std::size_t>(k));
    std::iota(ads.begin(), ads.end(), 0);
    const auto oracle = permutation_shapley(f.model, f.path, 9.0, ads);
    const auto phi = credits(shapley(f.model, f.path, 0, Normalization::kRaw));
    for (std::size_t i = 0; i < ads.size(); ++i) EXPECT_NEAR(phi[i], oracle[i], 1e-12);
  }
}

TEST(ShapleySynergyShare, TwoAdExampleGivesEachAdOne) {
  const ShapleySynergyShare r = shapley_synergy_share_check(two_ad_model(), two_ad_path(), 0);
  EXPECT_TRUE(r.consistent);
  EXPECT_NEAR(r.total_synergy, 2.0, 1e-12);
  for (double extra : r.extra_credit) EXPECT_NEAR(extra, 1.0, 1e-12);
}

TEST(ExpectedCredit, SingleAdHandIntegral) {
  // (2-1)*1 + (1.5-1)*1 + (1.2-1)*18 days at baseline 1/30.
  const UserPath p = make_path({ad(10.0)});
  EXPECT_NEAR(expected_credit(decaying_model(), p, 1), 5.1 / 30.0, 1e-12);
  const UserPath late = make_path({ad(29.5)});
  EXPECT_NEAR(expected_credit(decaying_model(), late, 1), 0.5 / 30.0, 1e-12);
}

TEST(ExpectedCredit, ZeroEffectIsZero) {
  IntensityModel m = decaying_model();
  for (int b = 0; b < 3; ++b) m.coefficients[CoefficientKey::term("ad", b)] = 0.0;
  EXPECT_DOUBLE_EQ(expected_credit(m, make_path({ad(3.0), ad(4.0)}), 2), 0.0);
}

TEST(ExpectedCredit, Errors) {
  EXPECT_THROW(expected_credit(decaying_model(), make_path({ad(3.0)}), 2), std::out_of_range);
  IntensityModel smooth;
  smooth.coefficients[CoefficientKey::intercept()] = 0.0;
  TermSpec t;
  t.name = "d";
  t.basis.kind = ExponentialBasis{{1.0}};
  smooth.spec.terms.push_back(t);
  smooth.coefficients[CoefficientKey::term("d", 0)] = 0.1;
  EXPECT_THROW(expected_credit(smooth, make_path({ad(3.0)}), 1), ModelError);
}

TEST(ExpectedCredit, MatchesMonteCarloAverageOfNormalizedCredit) {
  const IntensityModel m = busy_model();
  const UserPath base = make_path({ad(4.0), ad(5.0), ad(12.0)});
  const std::size_t j = 2;
  const double integral = expected_credit(m, base, j);
  const std::size_t replicates = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng rng = rng_stream(2024, 7, r);
    UserPath p = base;
    simulate_conversions(m, p, rng);
    double total = 0.0;
    for (std::size_t k = 0; k < conversion_count(p); ++k) {
      const CreditAssignment c = backwards_elimination(m, p, k, Normalization::kNormalized);
      if (c.ad_credits.size() >= j) total += c.ad_credits[j - 1].credit;
    }
    sum += total;
    sum_sq += total * total;
  }
  const double mean = sum / replicates;
  const double se = std::sqrt((sum_sq / replicates - mean * mean) / replicates);
  EXPECT_NEAR(mean, integral, 3.0 * se) << "integral " << integral << " se " << se;
}

TEST(Incremental, QueryEffectsStayInTheBaseline) {
  IntensityModel m;
  m.spec.terms.push_back(step_term("q", {30.0}, conditioning::Always{}, EffectKind::kQuery));
  m.spec.terms.push_back(step_term("ad", {30.0}));
  m.coefficients[CoefficientKey::intercept()] = 0.0;
  m.coefficients[CoefficientKey::term("q", 0)] = std::log(2.0);
  m.coefficients[CoefficientKey::term("ad", 0)] = std::log(3.0);
  const UserPath p = make_path({ad(1.0, {}, /*shown=*/false), ad(1.5), conversion(2.0)});

  const CreditAssignment inc = backwards_elimination(m, p, 0, Normalization::kRaw, true);
  ASSERT_EQ(inc.ad_credits.size(), 1u);
  EXPECT_EQ(inc.ad_credits[0].event_index, 1u);
  EXPECT_NEAR(inc.baseline_credit, 4.0, 1e-12);
  EXPECT_NEAR(inc.ad_credits[0].credit, 8.0, 1e-12);

  const CreditAssignment all = backwards_elimination(m, p, 0, Normalization::kRaw, false);
  EXPECT_EQ(all.ad_credits.size(), 2u);
  EXPECT_NEAR(all.baseline_credit, 1.0, 1e-12);
  EXPECT_NEAR(all.full_intensity, inc.full_intensity, 1e-12);

  const CreditAssignment sh = shapley(m, p, 0, Normalization::kRaw, true);
  EXPECT_NEAR(sh.ad_credits[0].credit, 8.0, 1e-12);
}

TEST(Incremental, ExpectedCreditHoldsQueryEffects) {
  IntensityModel m;
  m.spec.terms.push_back(step_term("q", {30.0}, conditioning::Always{}, EffectKind::kQuery));
  m.spec.terms.push_back(step_term("ad", {30.0}));
  m.coefficients[CoefficientKey::intercept()] = std::log(0.1);
  m.coefficients[CoefficientKey::term("q", 0)] = std::log(2.0);
  m.coefficients[CoefficientKey::term("ad", 0)] = std::log(3.0);
  // Unshown query at 5 doubles everything after it; the shown ad at 10 then
  // adds 0.1 * 2 * 2 * (3 - 1) per day for 20 days.
  const UserPath p = make_path({ad(5.0, {}, false), ad(10.0)});
  EXPECT_NEAR(expected_credit(m, p, 1, true), 0.1 * 4.0 * 2.0 * 20.0, 1e-12);
}

TEST(Attribute, DispatchesOnRule) {
  AttributionConfig config;
  config.normalization = Normalization::kRaw;
  config.rule = AttributionRule::kShapley;
  EXPECT_NEAR(attribute(two_ad_model(), two_ad_path(), 0, config).ad_credits[0].credit, 2.0, 1e-12);
  config.rule = AttributionRule::kBackwardsElimination;
  EXPECT_NEAR(attribute(two_ad_model(), two_ad_path(), 0, config).ad_credits[0].credit, 1.0, 1e-12);
}

TEST(Names, ParseAndPrint) {
  EXPECT_EQ(parse_rule("be"), AttributionRule::kBackwardsElimination);
  EXPECT_EQ(parse_rule(to_string(AttributionRule::kShapley)), AttributionRule::kShapley);
  EXPECT_EQ(parse_normalization("nonbaseline"), Normalization::kNonBaselineNormalized);
  EXPECT_EQ(parse_normalization(to_string(Normalization::kRaw)), Normalization::kRaw);
  EXPECT_THROW(parse_rule("lasso"), std::invalid_argument);
  EXPECT_THROW(parse_normalization("softmax"), std::invalid_argument);
}

TEST(CreditRecords, OneRecordPerConversionWithDegenerateMarker) {
  const UserPath p = make_path({conversion(0.5), ad(1.0), conversion(2.0)});
  AttributionConfig config;
  config.normalization = Normalization::kNonBaselineNormalized;
  const auto records = credit_records(decaying_model(), p, config);
  ASSERT_EQ(records.size(), 2u);
  const auto first = nlohmann::json::parse(records[0]);
  EXPECT_EQ(first.at("schema"), "mta-credit/1");
  EXPECT_TRUE(first.at("degenerate").get<bool>());
  EXPECT_TRUE(first.at("baseline").is_null());
  const auto second = nlohmann::json::parse(records[1]);
  EXPECT_EQ(second.at("credits").size(), 1u);
  EXPECT_NEAR(second.at("credits")[0].at("credit").get<double>(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(second.at("t_star").get<double>(), 2.0);
}

TEST(CreditRecords, CorpusOrderIndependentOfWorkers) {
  auto paths = busy_paths(500, 3);
  std::reverse(paths.begin(), paths.end());
  AttributionConfig config;
  const auto one = attribute_corpus(busy_model(), paths, config, 1);
  const auto four = attribute_corpus(busy_model(), paths, config, 4);
  EXPECT_EQ(one, four);
  std::string previous;
  for (const std::string& r : one) {
    const std::string user = nlohmann::json::parse(r).at("user_id");
    EXPECT_LE(previous, user);
    previous = user;
  }
}

}  // namespace
}  // namespace mta
