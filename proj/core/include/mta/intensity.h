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

// Log-linear conversion intensity.
//
//   log lambda(t) = alpha_0 + sum_f alpha_{f, level(f)}
//                 + sum over terms of sum over events of basis(t - t_j)
//
// A model is a ModelSpec (structure) plus coefficients keyed by
// CoefficientKey. Evaluating the structure at a time yields a DesignRow: the
// active keys with their multiplicities (step bases) or basis values
// (exponential bases). The log intensity is the dot product of the row with
// the coefficients.

#ifndef MTA_INTENSITY_H_
#define MTA_INTENSITY_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mta/events.h"

namespace mta {

inline constexpr std::string_view kModelSchema = "mta-model/1";

// Piecewise-constant effect over buckets (0, b1], (b1, b2], ..., in days
// since the event. Nothing is active after the last boundary.
struct StepBasis {
  std::vector<double> boundaries;
  friend bool operator==(const StepBasis&, const StepBasis&) = default;
};

// Elements exp(-rate * x) for x > 0.
struct ExponentialBasis {
  std::vector<double> rates;
  friend bool operator==(const ExponentialBasis&,
                         const ExponentialBasis&) = default;
};

struct BasisSpec {
  std::variant<StepBasis, ExponentialBasis> kind;

  bool is_step() const { return std::holds_alternative<StepBasis>(kind); }
  std::size_t size() const;
  // Serialized kind name; new bases register a name here.
  std::string_view kind_name() const;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

// Matches events whose feature `feature` equals `level`. An empty feature
// name matches every event.
struct FeaturePredicate {
  std::string feature;
  std::string level;

  bool matches(const FeatureValues& features) const;
  friend bool operator==(const FeaturePredicate&,
                         const FeaturePredicate&) = default;
};

namespace conditioning {

struct Always {
  friend bool operator==(const Always&, const Always&) = default;
};

struct FeatureEquals {
  FeaturePredicate predicate;
  friend bool operator==(const FeatureEquals&, const FeatureEquals&) = default;
};

// Path-level indicator: key (term, bucket, k) is active when exactly k
// matching events sit in that bucket, for 1 <= k <= max_count. Step basis
// only.
struct ExactCount {
  FeaturePredicate predicate;
  int max_count = 1;
  friend bool operator==(const ExactCount&, const ExactCount&) = default;
};

// Event j contributes only if an earlier selected event j' has
// t_j - t_j' < delta.
struct PrecededWithin {
  double delta = 0.0;
  friend bool operator==(const PrecededWithin&,
                         const PrecededWithin&) = default;
};

}  // namespace conditioning

using Conditioning =
    std::variant<conditioning::Always, conditioning::FeatureEquals,
                 conditioning::ExactCount, conditioning::PrecededWithin>;

// kAd terms apply to shown ads only; kQuery terms apply to every query.
enum class EffectKind { kAd, kQuery };

struct TermSpec {
  std::string name;
  EffectKind applies_to = EffectKind::kAd;
  BasisSpec basis;
  Conditioning conditioning;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

struct ModelSpec {
  // User features that shift the intercept, one coefficient per
  // non-reference level.
  std::vector<std::string> intercept_features;
  std::vector<TermSpec> terms;
  std::map<std::string, std::string> reference_levels;

  // Throws ModelError.
  void validate() const;
  bool is_piecewise_constant() const;
  const TermSpec* find_term(std::string_view name) const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct CoefficientKey {
  enum class Source : std::uint8_t { kIntercept, kUserFeature, kTerm };

  Source source = Source::kIntercept;
  std::string name;   // term or user-feature name
  int index = 0;      // basis element
  int count = 0;      // ExactCount multiplicity; 0 for other terms
  std::string level;  // user-feature level

  static CoefficientKey intercept();
  static CoefficientKey user_feature(std::string feature, std::string level);
  static CoefficientKey term(std::string name, int index, int count = 0);

  bool is_intercept() const { return source == Source::kIntercept; }
  // "intercept", "user:age=30", "ad[0]", "type1[2]#3".
  std::string label() const;

  auto operator<=>(const CoefficientKey&) const = default;
  bool operator==(const CoefficientKey&) const = default;
};

struct ActiveKey {
  CoefficientKey key;
  double weight = 1.0;
  friend bool operator==(const ActiveKey&, const ActiveKey&) = default;
};

// Sorted by key, no duplicates.
using DesignRow = std::vector<ActiveKey>;

// Every term key the spec can produce. User-feature keys depend on data and
// are not included.
std::vector<CoefficientKey> term_keys(const ModelSpec& spec);

struct IntensityModel {
  ModelSpec spec;
  std::map<CoefficientKey, double> coefficients;

  // Keys absent from the model contribute zero.
  double coefficient(const CoefficientKey& key) const;
  double eta(const DesignRow& row) const;
  // Throws ModelError.
  void validate() const;

  friend bool operator==(const IntensityModel&,
                         const IntensityModel&) = default;
};

// Which events take part in an evaluation. Indices into path.events,
// ascending. AdEffect terms see `ad_effect` (shown ads only); QueryEffect
// terms see `query_effect`.
struct EventSelection {
  std::vector<std::size_t> ad_effect;
  std::vector<std::size_t> query_effect;
};

EventSelection select_all(const UserPath& path);

// The ads in `ads` carry their ad effects. Query effects follow the same
// subset, or every query when `incremental` is set.
EventSelection select_ads(const UserPath& path,
                          std::span<const std::size_t> ads, bool incremental);

// The ads eligible for credit at time t: queries at or before t, restricted
// to shown ads in incremental mode.
std::vector<std::size_t> attributable_ads(const UserPath& path, Time t,
                                          bool incremental);

// kLeft is the value at t: an event at exactly t has no effect yet. kRight is
// the limit just after t; conversions are evaluated this way so an ad
// simultaneous with a conversion is already active.
enum class Limit { kLeft, kRight };

DesignRow design_row(const ModelSpec& spec, const UserPath& path, Time t,
                     const EventSelection& selection,
                     Limit limit = Limit::kLeft);

// log lambda(t) with the first `ad_prefix` ads (nullopt = all). In
// incremental mode ads are shown ads and every query keeps its query effect.
// Throws std::invalid_argument if t is outside the window or the prefix is
// longer than the number of ads at or before t.
double log_intensity(const IntensityModel& model, const UserPath& path, Time t,
                     std::optional<std::size_t> ad_prefix = std::nullopt,
                     bool incremental = false);

// lambda(t, selection) with the given limit.
double intensity(const IntensityModel& model, const UserPath& path, Time t,
                 const EventSelection& selection, Limit limit);

// A maximal interval (lo, hi] of constant intensity.
struct Segment {
  std::string user_id;
  Time lo = 0.0;
  Time hi = 0.0;
  DesignRow active;
  std::size_t conversions = 0;

  double exposure() const { return hi - lo; }
};

// Splits the window at every event time plus every step boundary, drops
// zero-length pieces and computes each piece's design row at its midpoint.
// A conversion at c is counted in the segment with lo <= c < hi (the last
// segment for c == window.end). Throws ModelError for non-step bases.
std::vector<Segment> segment_path(const ModelSpec& spec, const UserPath& path);

// Sum of exposures of the segments where each key is active.
std::map<CoefficientKey, double> total_offset_by_key(
    std::span<const Segment> segments);

// "mta-model/1" documents. A document without coefficients describes only
// the spec.
std::string model_to_json(const IntensityModel& model);
IntensityModel model_from_json(std::string_view text);
ModelSpec spec_from_json(std::string_view text);
std::string spec_to_json(const ModelSpec& spec);

IntensityModel read_model_file(const std::string& filename);
ModelSpec read_spec_file(const std::string& filename);
void write_text_file(const std::string& filename, std::string_view text);

}  // namespace mta

#endif  // MTA_INTENSITY_H_
