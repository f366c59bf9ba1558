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

#include "mta/intensity.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json_util.h"
#include "mta/error.h"

namespace mta {
namespace {

using internal::Json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Bucket of a step basis holding elapsed time x, or -1. kLeft uses the
// (lo, hi] convention, kRight its right limit [lo, hi).
int step_bucket(const std::vector<double>& boundaries, double x, Limit limit) {
  if (limit == Limit::kLeft) {
    if (x <= 0.0) return -1;
    auto it = std::lower_bound(boundaries.begin(), boundaries.end(), x);
    return it == boundaries.end() ? -1
                                  : static_cast<int>(it - boundaries.begin());
  }
  if (x < 0.0) return -1;
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
  return it == boundaries.end() ? -1
                                : static_cast<int>(it - boundaries.begin());
}

bool event_active(double x, Limit limit) {
  return limit == Limit::kLeft ? x > 0.0 : x >= 0.0;
}

void add_basis(const TermSpec& term, double x, Limit limit,
               std::vector<ActiveKey>& out) {
  std::visit(Overloaded{
                 [&](const StepBasis& step) {
                   int b = step_bucket(step.boundaries, x, limit);
                   if (b >= 0) out.push_back({CoefficientKey::term(term.name, b), 1.0});
                 },
                 [&](const ExponentialBasis& exponential) {
                   if (!event_active(x, limit)) return;
                   for (std::size_t l = 0; l < exponential.rates.size(); ++l) {
                     out.push_back({CoefficientKey::term(term.name, static_cast<int>(l)),
                                    std::exp(-exponential.rates[l] * x)});
                   }
                 }},
             term.basis.kind);
}

void add_term(const TermSpec& term, const UserPath& path,
              std::span<const std::size_t> selected, Time t, Limit limit,
              std::vector<ActiveKey>& out) {
  const bool ads_only = term.applies_to == EffectKind::kAd;
  auto eligible = [&](const Event& e) {
    return ads_only ? e.is_ad() : e.is_query();
  };
  std::visit(
      Overloaded{
          [&](const conditioning::Always&) {
            for (std::size_t i : selected) {
              const Event& e = path.events[i];
              if (eligible(e)) add_basis(term, t - e.t, limit, out);
            }
          },
          [&](const conditioning::FeatureEquals& c) {
            for (std::size_t i : selected) {
              const Event& e = path.events[i];
              if (eligible(e) && c.predicate.matches(e.features)) {
                add_basis(term, t - e.t, limit, out);
              }
            }
          },
          [&](const conditioning::PrecededWithin& c) {
            // Selected events are time-ordered, so the nearest earlier one
            // decides.
            const Event* previous = nullptr;
            for (std::size_t i : selected) {
              const Event& e = path.events[i];
              if (!eligible(e)) continue;
              if (previous != nullptr && e.t - previous->t < c.delta) {
                add_basis(term, t - e.t, limit, out);
              }
              previous = &e;
            }
          },
          [&](const conditioning::ExactCount& c) {
            const auto& step = std::get<StepBasis>(term.basis.kind);
            std::vector<int> counts(step.boundaries.size(), 0);
            for (std::size_t i : selected) {
              const Event& e = path.events[i];
              if (!eligible(e) || !c.predicate.matches(e.features)) continue;
              int b = step_bucket(step.boundaries, t - e.t, limit);
              if (b >= 0) ++counts[static_cast<std::size_t>(b)];
            }
            for (std::size_t b = 0; b < counts.size(); ++b) {
              if (counts[b] >= 1 && counts[b] <= c.max_count) {
                out.push_back({CoefficientKey::term(term.name, static_cast<int>(b),
                                                    counts[b]),
                               1.0});
              }
            }
          }},
      term.conditioning);
}

DesignRow merge_keys(std::vector<ActiveKey> raw) {
  std::sort(raw.begin(), raw.end(),
            [](const ActiveKey& a, const ActiveKey& b) { return a.key < b.key; });
  DesignRow row;
  row.reserve(raw.size());
  for (ActiveKey& entry : raw) {
    if (!row.empty() && row.back().key == entry.key) {
      row.back().weight += entry.weight;
    } else {
      row.push_back(std::move(entry));
    }
  }
  return row;
}

// ---- JSON ----------------------------------------------------------------

Json predicate_fields(const FeaturePredicate& p, Json out) {
  out["feature"] = p.feature;
  out["level"] = p.level;
  return out;
}

Json conditioning_json(const Conditioning& c) {
  return std::visit(
      Overloaded{
          [](const conditioning::Always&) { return Json{{"kind", "always"}}; },
          [](const conditioning::FeatureEquals& f) {
            return predicate_fields(f.predicate, Json{{"kind", "feature_equals"}});
          },
          [](const conditioning::ExactCount& e) {
            Json out = predicate_fields(e.predicate, Json{{"kind", "exact_count"}});
            out["max_count"] = e.max_count;
            return out;
          },
          [](const conditioning::PrecededWithin& p) {
            return Json{{"kind", "preceded_within"}, {"delta", p.delta}};
          }},
      c);
}

Json basis_json(const BasisSpec& basis) {
  return std::visit(
      Overloaded{[](const StepBasis& s) {
                   return Json{{"kind", "step"}, {"boundaries", s.boundaries}};
                 },
                 [](const ExponentialBasis& e) {
                   return Json{{"kind", "exponential"}, {"rates", e.rates}};
                 }},
      basis.kind);
}

Json spec_json(const ModelSpec& spec) {
  Json terms = Json::array();
  for (const TermSpec& term : spec.terms) {
    terms.push_back({{"name", term.name},
                     {"applies_to", term.applies_to == EffectKind::kAd ? "ad" : "query"},
                     {"basis", basis_json(term.basis)},
                     {"conditioning", conditioning_json(term.conditioning)}});
  }
  Json references = Json::object();
  for (const auto& [feature, level] : spec.reference_levels) {
    references[feature] = level;
  }
  return {{"intercept_features", spec.intercept_features},
          {"reference_levels", references},
          {"terms", terms}};
}

std::vector<double> number_list(const Json& object, std::string_view field,
                                const std::string& context) {
  const Json& list = internal::require(object, field, context);
  if (!list.is_array()) {
    throw DataError(context + ": '" + std::string(field) + "' must be an array");
  }
  std::vector<double> out;
  for (const Json& v : list) {
    if (!v.is_number()) {
      throw DataError(context + ": '" + std::string(field) +
                      "' must contain numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

BasisSpec parse_basis(const Json& j, const std::string& context) {
  const std::string kind = internal::require_string(j, "kind", context);
  if (kind == "step") return {StepBasis{number_list(j, "boundaries", context)}};
  if (kind == "exponential") {
    return {ExponentialBasis{number_list(j, "rates", context)}};
  }
  if (kind == "spline") {
    throw DataError(context + ": basis kind 'spline' is not implemented");
  }
  throw DataError(context + ": unknown basis kind '" + kind + "'");
}

FeaturePredicate parse_predicate(const Json& j, const std::string& context) {
  FeaturePredicate p;
  if (j.contains("feature")) p.feature = internal::require_string(j, "feature", context);
  if (j.contains("level")) p.level = internal::require_string(j, "level", context);
  return p;
}

Conditioning parse_conditioning(const Json& j, const std::string& context) {
  const std::string kind = internal::require_string(j, "kind", context);
  if (kind == "always") return conditioning::Always{};
  if (kind == "feature_equals") {
    return conditioning::FeatureEquals{parse_predicate(j, context)};
  }
  if (kind == "exact_count") {
    const double max_count = internal::require_number(j, "max_count", context);
    return conditioning::ExactCount{parse_predicate(j, context),
                                    static_cast<int>(max_count)};
  }
  if (kind == "preceded_within") {
    return conditioning::PrecededWithin{
        internal::require_number(j, "delta", context)};
  }
  throw DataError(context + ": unknown conditioning kind '" + kind + "'");
}

ModelSpec parse_spec(const Json& j) {
  const std::string context = "model spec";
  ModelSpec spec;
  if (auto it = j.find("intercept_features"); it != j.end()) {
    if (!it->is_array()) throw DataError(context + ": intercept_features must be an array");
    for (const Json& f : *it) {
      if (!f.is_string()) throw DataError(context + ": intercept feature names must be strings");
      spec.intercept_features.push_back(f.get<std::string>());
    }
  }
  if (auto it = j.find("reference_levels"); it != j.end()) {
    if (!it->is_object()) throw DataError(context + ": reference_levels must be an object");
    for (const auto& [feature, level] : it->items()) {
      if (!level.is_string()) throw DataError(context + ": reference levels must be strings");
      spec.reference_levels.emplace(feature, level.get<std::string>());
    }
  }
  const Json& terms = internal::require(j, "terms", context);
  if (!terms.is_array()) throw DataError(context + ": terms must be an array");
  for (const Json& t : terms) {
    TermSpec term;
    term.name = internal::require_string(t, "name", context);
    const std::string term_context = context + " term '" + term.name + "'";
    const std::string applies = internal::require_string(t, "applies_to", term_context);
    if (applies == "ad") {
      term.applies_to = EffectKind::kAd;
    } else if (applies == "query") {
      term.applies_to = EffectKind::kQuery;
    } else {
      throw DataError(term_context + ": applies_to must be 'ad' or 'query'");
    }
    term.basis = parse_basis(internal::require(t, "basis", term_context), term_context);
    term.conditioning = parse_conditioning(
        internal::require(t, "conditioning", term_context), term_context);
    spec.terms.push_back(std::move(term));
  }
  try {
    spec.validate();
  } catch (const ModelError& e) {
    throw DataError(e.what());
  }
  return spec;
}

const char* source_name(CoefficientKey::Source source) {
  switch (source) {
    case CoefficientKey::Source::kIntercept:
      return "intercept";
    case CoefficientKey::Source::kUserFeature:
      return "user_feature";
    case CoefficientKey::Source::kTerm:
      return "term";
  }
  return "term";
}

Json document_json(const ModelSpec& spec) {
  return {{"schema", kModelSchema}, {"spec", spec_json(spec)}};
}

std::string read_text_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw DataError("cannot open '" + filename + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::size_t BasisSpec::size() const {
  return std::visit(
      Overloaded{[](const StepBasis& s) { return s.boundaries.size(); },
                 [](const ExponentialBasis& e) { return e.rates.size(); }},
      kind);
}

std::string_view BasisSpec::kind_name() const {
  return is_step() ? "step" : "exponential";
}

bool FeaturePredicate::matches(const FeatureValues& features) const {
  if (feature.empty()) return true;
  auto it = features.find(feature);
  return it != features.end() && it->second == level;
}

void ModelSpec::validate() const {
  std::set<std::string> names;
  for (const TermSpec& term : terms) {
    const std::string where = "term '" + term.name + "'";
    if (term.name.empty()) throw ModelError("term names must be non-empty");
    if (!names.insert(term.name).second) {
      throw ModelError("duplicate " + where);
    }
    if (term.basis.size() == 0) throw ModelError(where + ": empty basis");
    if (const auto* step = std::get_if<StepBasis>(&term.basis.kind)) {
      const auto& b = step->boundaries;
      if (!(b.front() > 0.0)) {
        throw ModelError(where + ": first step boundary must be positive");
      }
      for (std::size_t i = 1; i < b.size(); ++i) {
        if (!(b[i] > b[i - 1])) {
          throw ModelError(where + ": step boundaries must be strictly ascending");
        }
      }
    } else {
      const auto& rates = std::get<ExponentialBasis>(term.basis.kind).rates;
      std::set<double> distinct;
      for (double rate : rates) {
        if (!(rate > 0.0)) throw ModelError(where + ": exponential rates must be positive");
        if (!distinct.insert(rate).second) {
          throw ModelError(where + ": exponential rates must be distinct");
        }
      }
    }
    if (const auto* c = std::get_if<conditioning::ExactCount>(&term.conditioning)) {
      if (c->max_count < 1) throw ModelError(where + ": exact_count needs max_count >= 1");
      if (!term.basis.is_step()) {
        throw ModelError(where + ": exact_count requires a step basis");
      }
    }
    if (const auto* c = std::get_if<conditioning::PrecededWithin>(&term.conditioning)) {
      if (!(c->delta > 0.0)) throw ModelError(where + ": preceded_within needs delta > 0");
    }
  }
  std::set<std::string> features;
  for (const std::string& feature : intercept_features) {
    if (feature.empty()) throw ModelError("intercept feature names must be non-empty");
    if (!features.insert(feature).second) {
      throw ModelError("duplicate intercept feature '" + feature + "'");
    }
    if (!reference_levels.contains(feature)) {
      throw ModelError("intercept feature '" + feature + "' has no reference level");
    }
  }
}

bool ModelSpec::is_piecewise_constant() const {
  return std::all_of(terms.begin(), terms.end(),
                     [](const TermSpec& t) { return t.basis.is_step(); });
}

const TermSpec* ModelSpec::find_term(std::string_view name) const {
  for (const TermSpec& term : terms) {
    if (term.name == name) return &term;
  }
  return nullptr;
}

CoefficientKey CoefficientKey::intercept() { return {}; }

CoefficientKey CoefficientKey::user_feature(std::string feature,
                                            std::string level) {
  CoefficientKey key;
  key.source = Source::kUserFeature;
  key.name = std::move(feature);
  key.level = std::move(level);
  return key;
}

CoefficientKey CoefficientKey::term(std::string name, int index, int count) {
  CoefficientKey key;
  key.source = Source::kTerm;
  key.name = std::move(name);
  key.index = index;
  key.count = count;
  return key;
}

std::string CoefficientKey::label() const {
  switch (source) {
    case Source::kIntercept:
      return "intercept";
    case Source::kUserFeature:
      return "user:" + name + "=" + level;
    case Source::kTerm:
      break;
  }
  std::string out = name + "[" + std::to_string(index) + "]";
  if (count > 0) out += "#" + std::to_string(count);
  return out;
}

std::vector<CoefficientKey> term_keys(const ModelSpec& spec) {
  std::vector<CoefficientKey> keys;
  for (const TermSpec& term : spec.terms) {
    const int size = static_cast<int>(term.basis.size());
    const auto* exact = std::get_if<conditioning::ExactCount>(&term.conditioning);
    for (int b = 0; b < size; ++b) {
      if (exact == nullptr) {
        keys.push_back(CoefficientKey::term(term.name, b));
      } else {
        for (int k = 1; k <= exact->max_count; ++k) {
          keys.push_back(CoefficientKey::term(term.name, b, k));
        }
      }
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

double IntensityModel::coefficient(const CoefficientKey& key) const {
  auto it = coefficients.find(key);
  return it == coefficients.end() ? 0.0 : it->second;
}

double IntensityModel::eta(const DesignRow& row) const {
  double total = 0.0;
  for (const ActiveKey& entry : row) total += entry.weight * coefficient(entry.key);
  return total;
}

void IntensityModel::validate() const {
  spec.validate();
  if (!coefficients.contains(CoefficientKey::intercept())) {
    throw ModelError("model has no intercept coefficient");
  }
  for (const auto& [key, value] : coefficients) {
    if (!std::isfinite(value) || !std::isfinite(std::exp(value)) ||
        !(std::exp(value) > 0.0)) {
      throw ModelError("coefficient " + key.label() + " is not finite on the exp scale");
    }
    switch (key.source) {
      case CoefficientKey::Source::kIntercept:
        break;
      case CoefficientKey::Source::kUserFeature: {
        const auto& f = spec.intercept_features;
        if (std::find(f.begin(), f.end(), key.name) == f.end() || key.level.empty() ||
            spec.reference_levels.at(key.name) == key.level) {
          throw ModelError("coefficient " + key.label() + " is not derivable from the spec");
        }
        break;
      }
      case CoefficientKey::Source::kTerm: {
        const TermSpec* term = spec.find_term(key.name);
        bool ok = term != nullptr && key.index >= 0 &&
                  key.index < static_cast<int>(term->basis.size());
        if (ok) {
          const auto* exact = std::get_if<conditioning::ExactCount>(&term->conditioning);
          ok = exact == nullptr ? key.count == 0
                                : key.count >= 1 && key.count <= exact->max_count;
        }
        if (!ok) {
          throw ModelError("coefficient " + key.label() + " is not derivable from the spec");
        }
        break;
      }
    }
  }
}

EventSelection select_all(const UserPath& path) {
  EventSelection selection;
  selection.ad_effect = query_event_indices(path, /*shown_only=*/false);
  selection.query_effect = selection.ad_effect;
  return selection;
}

EventSelection select_ads(const UserPath& path,
                          std::span<const std::size_t> ads, bool incremental) {
  EventSelection selection;
  selection.ad_effect.assign(ads.begin(), ads.end());
  if (incremental) {
    selection.query_effect = query_event_indices(path, /*shown_only=*/false);
  } else {
    selection.query_effect = selection.ad_effect;
  }
  return selection;
}

std::vector<std::size_t> attributable_ads(const UserPath& path, Time t,
                                          bool incremental) {
  std::vector<std::size_t> ads;
  for (std::size_t i = 0; i < path.events.size(); ++i) {
    const Event& e = path.events[i];
    if (e.t > t) break;
    if (incremental ? e.is_ad() : e.is_query()) ads.push_back(i);
  }
  return ads;
}

DesignRow design_row(const ModelSpec& spec, const UserPath& path, Time t,
                     const EventSelection& selection, Limit limit) {
  std::vector<ActiveKey> raw;
  raw.reserve(4);
  raw.push_back({CoefficientKey::intercept(), 1.0});
  for (const std::string& feature : spec.intercept_features) {
    auto it = path.user_features.find(feature);
    if (it == path.user_features.end()) continue;
    auto ref = spec.reference_levels.find(feature);
    if (ref != spec.reference_levels.end() && ref->second == it->second) continue;
    raw.push_back({CoefficientKey::user_feature(feature, it->second), 1.0});
  }
  for (const TermSpec& term : spec.terms) {
    const auto& selected = term.applies_to == EffectKind::kAd
                               ? selection.ad_effect
                               : selection.query_effect;
    add_term(term, path, selected, t, limit, raw);
  }
  return merge_keys(std::move(raw));
}

double log_intensity(const IntensityModel& model, const UserPath& path, Time t,
                     std::optional<std::size_t> ad_prefix, bool incremental) {
  if (!path.window.contains(t)) {
    throw std::invalid_argument("log_intensity: t outside the observation window");
  }
  if (!ad_prefix) {
    EventSelection selection = select_all(path);
    if (incremental) {
      selection.ad_effect = query_event_indices(path, /*shown_only=*/true);
    }
    return model.eta(design_row(model.spec, path, t, selection));
  }
  std::vector<std::size_t> ads = attributable_ads(path, t, incremental);
  if (*ad_prefix > ads.size()) {
    throw std::invalid_argument("log_intensity: ad_prefix exceeds available ads");
  }
  ads.resize(*ad_prefix);
  return model.eta(
      design_row(model.spec, path, t, select_ads(path, ads, incremental)));
}

double intensity(const IntensityModel& model, const UserPath& path, Time t,
                 const EventSelection& selection, Limit limit) {
  return std::exp(model.eta(design_row(model.spec, path, t, selection, limit)));
}

std::vector<Segment> segment_path(const ModelSpec& spec, const UserPath& path) {
  if (!spec.is_piecewise_constant()) {
    throw ModelError("segmentation requires piecewise-constant basis");
  }
  const Time start = path.window.start;
  const Time end = path.window.end;

  std::vector<double> offsets{0.0};
  for (const TermSpec& term : spec.terms) {
    const auto& b = std::get<StepBasis>(term.basis.kind).boundaries;
    offsets.insert(offsets.end(), b.begin(), b.end());
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());

  std::vector<Time> cuts{start, end};
  for (const Event& e : path.events) {
    if (!e.is_query()) continue;
    for (double offset : offsets) {
      const Time p = e.t + offset;
      if (p >= end) break;
      if (p > start) cuts.push_back(p);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const EventSelection selection = select_all(path);
  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Time lo = cuts[i];
    const Time hi = cuts[i + 1];
    DesignRow row = design_row(spec, path, 0.5 * (lo + hi), selection);
    if (!segments.empty() && segments.back().active == row) {
      segments.back().hi = hi;
      continue;
    }
    Segment segment;
    segment.user_id = path.user_id;
    segment.lo = lo;
    segment.hi = hi;
    segment.active = std::move(row);
    segments.push_back(std::move(segment));
  }

  for (const Event& e : path.events) {
    if (!e.is_conversion()) continue;
    auto it = std::upper_bound(
        segments.begin(), segments.end(), e.t,
        [](Time t, const Segment& s) { return t < s.lo; });
    // `it` is the first segment starting after t; t belongs to its
    // predecessor, or to the last segment when t == end.
    std::size_t index = it == segments.begin()
                            ? 0
                            : static_cast<std::size_t>(it - segments.begin()) - 1;
    ++segments[index].conversions;
  }
  return segments;
}

std::map<CoefficientKey, double> total_offset_by_key(
    std::span<const Segment> segments) {
  std::map<CoefficientKey, double> offsets;
  for (const Segment& segment : segments) {
    for (const ActiveKey& entry : segment.active) {
      offsets[entry.key] += segment.exposure();
    }
  }
  return offsets;
}

std::string spec_to_json(const ModelSpec& spec) {
  return document_json(spec).dump(2);
}

std::string model_to_json(const IntensityModel& model) {
  Json document = document_json(model.spec);
  Json coefficients = Json::array();
  for (const auto& [key, value] : model.coefficients) {
    Json entry{{"source", source_name(key.source)}, {"label", key.label()}};
    if (key.source != CoefficientKey::Source::kIntercept) entry["name"] = key.name;
    if (key.source == CoefficientKey::Source::kTerm) {
      entry["index"] = key.index;
      if (key.count > 0) entry["count"] = key.count;
    }
    if (key.source == CoefficientKey::Source::kUserFeature) entry["level"] = key.level;
    entry["value"] = value;
    coefficients.push_back(std::move(entry));
  }
  document["coefficients"] = std::move(coefficients);
  return document.dump(2);
}

ModelSpec spec_from_json(std::string_view text) {
  Json document = internal::parse_json(text, "model document");
  internal::check_schema(document, kModelSchema);
  return parse_spec(internal::require(document, "spec", "model document"));
}

IntensityModel model_from_json(std::string_view text) {
  const std::string context = "model document";
  Json document = internal::parse_json(text, context);
  internal::check_schema(document, kModelSchema);
  IntensityModel model;
  model.spec = parse_spec(internal::require(document, "spec", context));
  const Json& coefficients = internal::require(document, "coefficients", context);
  if (!coefficients.is_array()) throw DataError(context + ": coefficients must be an array");
  for (const Json& entry : coefficients) {
    const std::string source = internal::require_string(entry, "source", context);
    CoefficientKey key;
    if (source == "intercept") {
      key = CoefficientKey::intercept();
    } else if (source == "user_feature") {
      key = CoefficientKey::user_feature(internal::require_string(entry, "name", context),
                                         internal::require_string(entry, "level", context));
    } else if (source == "term") {
      const int count = entry.contains("count")
                            ? static_cast<int>(internal::require_number(entry, "count", context))
                            : 0;
      key = CoefficientKey::term(internal::require_string(entry, "name", context),
                                 static_cast<int>(internal::require_number(entry, "index", context)),
                                 count);
    } else {
      throw DataError(context + ": unknown coefficient source '" + source + "'");
    }
    if (!model.coefficients.emplace(key, internal::require_number(entry, "value", context))
             .second) {
      throw DataError(context + ": duplicate coefficient " + key.label());
    }
  }
  try {
    model.validate();
  } catch (const ModelError& e) {
    throw DataError(e.what());
  }
  return model;
}

IntensityModel read_model_file(const std::string& filename) {
  return model_from_json(read_text_file(filename));
}

ModelSpec read_spec_file(const std::string& filename) {
  return spec_from_json(read_text_file(filename));
}

void write_text_file(const std::string& filename, std::string_view text) {
  std::ofstream out(filename, std::ios::binary);
  if (!out) throw DataError("cannot write '" + filename + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

}  // namespace mta
