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

// Synthetic path corpora for the four reference scenarios and for custom
// generating models, with optional counterfactual (ads withheld) users.

#ifndef MTA_SIMULATOR_H_
#define MTA_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mta/events.h"
#include "mta/intensity.h"

namespace mta {

inline constexpr std::string_view kScenarioSchema = "mta-scenario/1";
inline constexpr std::string_view kManifestSchema = "mta-manifest/1";

enum class Scenario { kS1, kS2, kS3, kS4, kCustom };

std::string_view to_string(Scenario scenario);
// "s1".."s4", "custom". Throws std::invalid_argument.
Scenario parse_scenario(std::string_view name);

// Poisson(mean) clipped to [min, max].
struct AdCountLaw {
  double poisson_mean = 1.0;
  int min = 1;
  int max = 1;
};

struct CustomScenario {
  IntensityModel truth;  // step bases only
  AdCountLaw ads;
  // Every ad draws each feature uniformly from its levels.
  std::map<std::string, std::vector<std::string>> ad_features;
};

enum class UnexposedMode { kIndependent, kPaired };

struct ScenarioConfig {
  Scenario scenario = Scenario::kS1;
  std::optional<CustomScenario> custom;
  std::size_t users = 200000;  // exposed users per dataset
  double window_days = 30.0;
  std::size_t datasets = 50;
  std::uint64_t seed = 42;
  // Share of the corpus made of counterfactual users whose queries show no
  // ad: round(users * f / (1 - f)) of them are added.
  double unexposed_fraction = 0.0;
  UnexposedMode unexposed_mode = UnexposedMode::kIndependent;

  std::size_t unexposed_users() const;
  // Throws std::invalid_argument.
  void validate() const;
};

// Full-size runs: 1e6 users, 500 datasets.
ScenarioConfig full_scale(ScenarioConfig config);

using Rng = std::mt19937_64;

// Independent reproducible substream per (seed, dataset, user).
Rng rng_stream(std::uint64_t seed, std::uint64_t dataset_index,
               std::uint64_t user_index);

// The generating model. For S4 ad effects add up per ad.
IntensityModel scenario_truth(const ScenarioConfig& config);

// The structure fitted to the scenario's data. S4 fits one coefficient per
// exact ad count, the others reuse the generating structure.
ModelSpec scenario_fit_spec(const ScenarioConfig& config);

// True exp(coefficient) for every key of the fit spec.
std::map<CoefficientKey, double> scenario_true_multipliers(
    const ScenarioConfig& config);

// Draws conversions segment by segment: Poisson(lambda * length) per
// segment, uniform times within it. Existing conversions are kept.
void simulate_conversions(const IntensityModel& truth, UserPath& path, Rng& rng);

// Exposed users first ("d{ds}u{i}", arm=exposed), then counterfactual users
// ("d{ds}c{i}", arm=unexposed). Output does not depend on `workers`.
std::vector<UserPath> simulate_dataset(const ScenarioConfig& config,
                                       std::size_t dataset_index,
                                       int workers = 1);

// "mta-scenario/1" documents: {"model": <mta-model/1>, "ads_per_user":
// {"poisson_mean", "min", "max"}, "ad_features": {name: [levels]}}.
CustomScenario custom_scenario_from_json(std::string_view text);
std::string custom_scenario_to_json(const CustomScenario& scenario);

std::string manifest_json(const ScenarioConfig& config,
                          const std::vector<std::string>& files);

// Writes ds{index}.jsonl for every dataset plus manifest.json into
// `directory` and returns the dataset file names.
std::vector<std::string> write_corpus(const ScenarioConfig& config,
                                      const std::string& directory,
                                      int workers = 1);

}  // namespace mta

#endif  // MTA_SIMULATOR_H_
