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

#include "mta/simulator.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json_util.h"
#include "mta/error.h"
#include "parallel.h"

namespace mta {
namespace {

using internal::Json;

constexpr double kBaselinePerDay = 1.0 / 30.0;
const std::vector<double> kBuckets{1.0, 2.0, 30.0};
constexpr double kType1[] = {2.0, 1.5, 1.2};
constexpr double kType2[] = {1.5, 1.2, 1.0};
constexpr double kNull[] = {1.0, 1.0, 1.0};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

TermSpec step_term(std::string name, Conditioning conditioning) {
  TermSpec term;
  term.name = std::move(name);
  term.applies_to = EffectKind::kAd;
  term.basis.kind = StepBasis{kBuckets};
  term.conditioning = std::move(conditioning);
  return term;
}

conditioning::FeatureEquals type_is(std::string level) {
  return conditioning::FeatureEquals{{"type", std::move(level)}};
}

void set_multipliers(IntensityModel& model, const std::string& term,
                     const double (&multipliers)[3]) {
  for (int b = 0; b < 3; ++b) {
    model.coefficients[CoefficientKey::term(term, b)] = std::log(multipliers[b]);
  }
}

const double (&type2_multipliers(Scenario s))[3] {
  return s == Scenario::kS3 ? kNull : kType2;
}

int clipped_poisson(const AdCountLaw& law, Rng& rng) {
  int n = 0;
  if (law.poisson_mean > 0.0) n = std::poisson_distribution<int>(law.poisson_mean)(rng);
  return std::clamp(n, law.min, law.max);
}

// Ad queries of one user, drawn before any conversion.
std::vector<Event> draw_ads(const ScenarioConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> when(0.0, config.window_days);
  std::vector<Event> ads;
  auto add = [&](FeatureValues features) {
    ads.push_back({EventKind::kAdQuery, when(rng), true, std::move(features)});
  };
  switch (config.scenario) {
    case Scenario::kS1:
      add({{"type", "1"}});
      break;
    case Scenario::kS2:
    case Scenario::kS3:
      add({{"type", "1"}});
      add({{"type", "2"}});
      break;
    case Scenario::kS4: {
      const int n = clipped_poisson({2.0, 1, 3}, rng);
      for (int i = 0; i < n; ++i) {
        const Time t = when(rng);
        const bool first = std::bernoulli_distribution(0.5)(rng);
        ads.push_back({EventKind::kAdQuery, t, true, {{"type", first ? "1" : "2"}}});
      }
      break;
    }
    case Scenario::kCustom: {
      const CustomScenario& custom = *config.custom;
      const int n = clipped_poisson(custom.ads, rng);
      for (int i = 0; i < n; ++i) {
        Event e{EventKind::kAdQuery, when(rng), true, {}};
        for (const auto& [name, levels] : custom.ad_features) {
          std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
          e.features[name] = levels[pick(rng)];
        }
        ads.push_back(std::move(e));
      }
      break;
    }
  }
  return ads;
}

UserPath make_user(const ScenarioConfig& config, const IntensityModel& truth,
                   std::size_t dataset, std::size_t index) {
  const std::size_t exposed = config.users;
  const bool is_exposed = index < exposed;
  UserPath path;
  path.window = {0.0, config.window_days};
  Rng rng = rng_stream(config.seed, dataset, index);
  if (is_exposed) {
    path.user_id = "d" + std::to_string(dataset) + "u" + std::to_string(index);
    path.user_features = {{"arm", "exposed"}};
    path.events = draw_ads(config, rng);
  } else {
    const std::size_t i = index - exposed;
    path.user_id = "d" + std::to_string(dataset) + "c" + std::to_string(i);
    path.user_features = {{"arm", "unexposed"}};
    if (config.unexposed_mode == UnexposedMode::kPaired) {
      Rng twin = rng_stream(config.seed, dataset, i % exposed);
      path.events = draw_ads(config, twin);
    } else {
      path.events = draw_ads(config, rng);
    }
    for (Event& e : path.events) e.shown = false;
  }
  sort_events(path.events);
  simulate_conversions(truth, path, rng);
  return path;
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kS1:
      return "s1";
    case Scenario::kS2:
      return "s2";
    case Scenario::kS3:
      return "s3";
    case Scenario::kS4:
      return "s4";
    case Scenario::kCustom:
      return "custom";
  }
  return "custom";
}

Scenario parse_scenario(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "s1" || lower == "1") return Scenario::kS1;
  if (lower == "s2" || lower == "2") return Scenario::kS2;
  if (lower == "s3" || lower == "3") return Scenario::kS3;
  if (lower == "s4" || lower == "4") return Scenario::kS4;
  if (lower == "custom") return Scenario::kCustom;
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

std::size_t ScenarioConfig::unexposed_users() const {
  if (unexposed_fraction <= 0.0) return 0;
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(users) * unexposed_fraction / (1.0 - unexposed_fraction)));
}

void ScenarioConfig::validate() const {
  if (users < 1) throw std::invalid_argument("users must be >= 1");
  if (datasets < 1) throw std::invalid_argument("datasets must be >= 1");
  if (!(window_days > 0.0)) throw std::invalid_argument("window_days must be positive");
  if (!(unexposed_fraction >= 0.0 && unexposed_fraction < 1.0)) {
    throw std::invalid_argument("unexposed_fraction must lie in [0, 1)");
  }
  if (scenario == Scenario::kCustom) {
    if (!custom) throw std::invalid_argument("custom scenario without a definition");
    const AdCountLaw& law = custom->ads;
    if (law.min < 0 || law.max < law.min || !(law.poisson_mean >= 0.0)) {
      throw std::invalid_argument("invalid ad-count law");
    }
    for (const auto& [name, levels] : custom->ad_features) {
      if (levels.empty()) {
        throw std::invalid_argument("ad feature '" + name + "' has no levels");
      }
    }
    custom->truth.validate();
    if (!custom->truth.spec.is_piecewise_constant()) {
      throw ModelError("simulation requires piecewise-constant (step) bases");
    }
  }
}

ScenarioConfig full_scale(ScenarioConfig config) {
  config.users = 1000000;
  config.datasets = 500;
  return config;
}

Rng rng_stream(std::uint64_t seed, std::uint64_t dataset_index,
               std::uint64_t user_index) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(dataset_index + 0x632be59bd9b4e019ULL));
  const std::uint64_t c = splitmix64(b ^ splitmix64(user_index + 0x8cb92ba72f3d8dd7ULL));
  return Rng(c);
}

IntensityModel scenario_truth(const ScenarioConfig& config) {
  if (config.scenario == Scenario::kCustom) {
    if (!config.custom) throw std::invalid_argument("custom scenario without a definition");
    return config.custom->truth;
  }
  IntensityModel model;
  model.coefficients[CoefficientKey::intercept()] = std::log(kBaselinePerDay);
  if (config.scenario == Scenario::kS1) {
    model.spec.terms.push_back(step_term("ad", conditioning::Always{}));
    set_multipliers(model, "ad", kType1);
    return model;
  }
  model.spec.terms.push_back(step_term("type1", type_is("1")));
  model.spec.terms.push_back(step_term("type2", type_is("2")));
  set_multipliers(model, "type1", kType1);
  set_multipliers(model, "type2", type2_multipliers(config.scenario));
  return model;
}

ModelSpec scenario_fit_spec(const ScenarioConfig& config) {
  if (config.scenario != Scenario::kS4) return scenario_truth(config).spec;
  ModelSpec spec;
  spec.terms.push_back(step_term("type1", conditioning::ExactCount{{"type", "1"}, 3}));
  spec.terms.push_back(step_term("type2", conditioning::ExactCount{{"type", "2"}, 3}));
  return spec;
}

std::map<CoefficientKey, double> scenario_true_multipliers(
    const ScenarioConfig& config) {
  const IntensityModel truth = scenario_truth(config);
  std::map<CoefficientKey, double> out;
  if (config.scenario != Scenario::kS4) {
    for (const auto& [key, value] : truth.coefficients) out[key] = std::exp(value);
    return out;
  }
  out[CoefficientKey::intercept()] = kBaselinePerDay;
  for (const CoefficientKey& key : term_keys(scenario_fit_spec(config))) {
    const double beta = truth.coefficient(CoefficientKey::term(key.name, key.index));
    out[key] = std::exp(key.count * beta);
  }
  return out;
}

void simulate_conversions(const IntensityModel& truth, UserPath& path, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Event> conversions;
  for (const Segment& s : segment_path(truth.spec, path)) {
    const double mean = std::exp(truth.eta(s.active)) * s.exposure();
    if (!(mean > 0.0)) continue;
    const int n = std::poisson_distribution<int>(mean)(rng);
    for (int i = 0; i < n; ++i) {
      conversions.push_back({EventKind::kConversion, s.lo + s.exposure() * unit(rng), true, {}});
    }
  }
  if (conversions.empty()) return;
  path.events.insert(path.events.end(), conversions.begin(), conversions.end());
  sort_events(path.events);
}

std::vector<UserPath> simulate_dataset(const ScenarioConfig& config,
                                       std::size_t dataset_index, int workers) {
  config.validate();
  const IntensityModel truth = scenario_truth(config);
  const std::size_t total = config.users + config.unexposed_users();
  std::vector<UserPath> paths(total);
  internal::parallel_for(total, workers, [&](std::size_t i) {
    paths[i] = make_user(config, truth, dataset_index, i);
  });
  return paths;
}

CustomScenario custom_scenario_from_json(std::string_view text) {
  const Json doc = internal::parse_json(text, "scenario");
  internal::check_schema(doc, kScenarioSchema);
  CustomScenario out;
  out.truth = model_from_json(internal::require(doc, "model", "scenario").dump());
  if (doc.contains("ads_per_user")) {
    const Json& law = doc.at("ads_per_user");
    out.ads.poisson_mean = internal::require_number(law, "poisson_mean", "ads_per_user");
    out.ads.min = static_cast<int>(internal::require_number(law, "min", "ads_per_user"));
    out.ads.max = static_cast<int>(internal::require_number(law, "max", "ads_per_user"));
  }
  if (doc.contains("ad_features")) {
    const Json& features = doc.at("ad_features");
    if (!features.is_object()) throw DataError("scenario: ad_features must be an object");
    for (const auto& [name, levels] : features.items()) {
      if (!levels.is_array() || levels.empty()) {
        throw DataError("scenario: ad feature '" + name + "' needs a non-empty level list");
      }
      for (const Json& level : levels) {
        if (!level.is_string()) throw DataError("scenario: levels must be strings");
        out.ad_features[name].push_back(level.get<std::string>());
      }
    }
  }
  return out;
}

std::string custom_scenario_to_json(const CustomScenario& scenario) {
  Json doc{{"schema", kScenarioSchema},
           {"model", Json::parse(model_to_json(scenario.truth))},
           {"ads_per_user",
            {{"poisson_mean", scenario.ads.poisson_mean},
             {"min", scenario.ads.min},
             {"max", scenario.ads.max}}},
           {"ad_features", scenario.ad_features}};
  return doc.dump(2);
}

std::string manifest_json(const ScenarioConfig& config,
                          const std::vector<std::string>& files) {
  Json doc{{"schema", kManifestSchema},
           {"scenario", to_string(config.scenario)},
           {"users", config.users},
           {"unexposed_users", config.unexposed_users()},
           {"unexposed_fraction", config.unexposed_fraction},
           {"unexposed_mode",
            config.unexposed_mode == UnexposedMode::kPaired ? "paired" : "independent"},
           {"window_days", config.window_days},
           {"datasets", config.datasets},
           {"seed", config.seed},
           {"files", files}};
  if (config.custom) doc["custom"] = Json::parse(custom_scenario_to_json(*config.custom));
  return doc.dump(2);
}

std::vector<std::string> write_corpus(const ScenarioConfig& config,
                                      const std::string& directory, int workers) {
  config.validate();
  std::filesystem::create_directories(directory);
  std::vector<std::string> files;
  for (std::size_t d = 0; d < config.datasets; ++d) {
    const std::string name = "ds" + std::to_string(d) + ".jsonl";
    const std::vector<UserPath> paths = simulate_dataset(config, d, workers);
    std::ofstream out(std::filesystem::path(directory) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + name);
    write_paths(out, paths);
    files.push_back(name);
  }
  write_text_file((std::filesystem::path(directory) / "manifest.json").string(),
                  manifest_json(config, files) + "\n");
  return files;
}

}  // namespace mta
