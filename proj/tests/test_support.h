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

// Small builders shared by the unit tests.

#ifndef MTA_TESTS_TEST_SUPPORT_H_
#define MTA_TESTS_TEST_SUPPORT_H_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mta/events.h"
#include "mta/intensity.h"

namespace mta::testing {

inline Event ad(Time t, FeatureValues features = {}, bool shown = true) {
  return {EventKind::kAdQuery, t, shown, std::move(features)};
}

inline Event conversion(Time t) { return {EventKind::kConversion, t, true, {}}; }

inline UserPath make_path(std::vector<Event> events, Time end = 30.0,
                          std::string id = "u") {
  UserPath p;
  p.user_id = std::move(id);
  p.window = {0.0, end};
  p.events = std::move(events);
  sort_events(p.events);
  return p;
}

inline TermSpec step_term(std::string name, std::vector<double> boundaries,
                          Conditioning conditioning = conditioning::Always{},
                          EffectKind applies_to = EffectKind::kAd) {
  TermSpec t;
  t.name = std::move(name);
  t.applies_to = applies_to;
  t.basis.kind = StepBasis{std::move(boundaries)};
  t.conditioning = std::move(conditioning);
  return t;
}

inline conditioning::FeatureEquals feature_is(std::string name, std::string level) {
  return conditioning::FeatureEquals{{std::move(name), std::move(level)}};
}

// Single ad-type model with baseline 1/30 per day and multipliers 2, 1.5,
// 1.2 over (0,1], (1,2], (2,30].
inline IntensityModel decaying_model() {
  IntensityModel m;
  m.spec.terms.push_back(step_term("ad", {1.0, 2.0, 30.0}));
  m.coefficients[CoefficientKey::intercept()] = std::log(1.0 / 30.0);
  m.coefficients[CoefficientKey::term("ad", 0)] = std::log(2.0);
  m.coefficients[CoefficientKey::term("ad", 1)] = std::log(1.5);
  m.coefficients[CoefficientKey::term("ad", 2)] = std::log(1.2);
  return m;
}

// Baseline 1; ad "1" doubles and ad "2" triples the intensity while active.
inline IntensityModel two_ad_model() {
  IntensityModel m;
  m.spec.terms.push_back(step_term("a1", {30.0}, feature_is("id", "1")));
  m.spec.terms.push_back(step_term("a2", {30.0}, feature_is("id", "2")));
  m.coefficients[CoefficientKey::intercept()] = 0.0;
  m.coefficients[CoefficientKey::term("a1", 0)] = std::log(2.0);
  m.coefficients[CoefficientKey::term("a2", 0)] = std::log(3.0);
  return m;
}

// As two_ad_model, but a second ad within one day of another only scales
// its own effect by 1/2, so lambda({A1, A2}) = 3.
inline IntensityModel damped_two_ad_model() {
  IntensityModel m = two_ad_model();
  m.spec.terms.push_back(step_term("repeat", {30.0}, conditioning::PrecededWithin{1.0}));
  m.coefficients[CoefficientKey::term("repeat", 0)] = std::log(0.5);
  return m;
}

// A1 at t=1, A2 at t=1.5, conversion at t=2.
inline UserPath two_ad_path() {
  return make_path({ad(1.0, {{"id", "1"}}), ad(1.5, {{"id", "2"}}), conversion(2.0)});
}

}  // namespace mta::testing

#endif  // MTA_TESTS_TEST_SUPPORT_H_
