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

// End-to-end scenario runs: simulate each dataset, fit the scenario's model
// on the exposed users, attribute, and summarize across datasets.

#ifndef MTA_SCENARIO_H_
#define MTA_SCENARIO_H_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mta/attribution.h"
#include "mta/estimation.h"
#include "mta/intensity.h"
#include "mta/simulator.h"

namespace mta {

inline constexpr std::string_view kScenarioResultSchema = "mta-scenario-result/1";

struct ScenarioRunConfig {
  ScenarioConfig scenario;
  FitConfig fit;
  AttributionConfig attribution;  // normalization is forced to kNormalized
  int workers = 1;
  // Called with one line per finished dataset.
  std::function<void(const std::string&)> log;
};

struct DatasetOutcome {
  std::size_t index = 0;
  IntensityModel model;
  bool converged = false;
  std::map<CoefficientKey, double> offsets;
  double aicpe = 0.0;
  std::optional<double> icpe;    // needs unexposed users
  std::optional<double> picppe;  // needs unexposed users
};

struct SampleSummary {
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  std::size_t replicates = 0;
};

SampleSummary summarize(const std::vector<double>& values);

struct ScenarioResult {
  ScenarioConfig config;
  std::map<CoefficientKey, double> truth;  // exp scale
  // Across datasets, exp scale. With one dataset the quantiles equal the mean.
  std::map<CoefficientKey, ReplicateStat> estimates;
  std::map<CoefficientKey, double> mean_offsets;
  std::vector<DatasetOutcome> datasets;
  SampleSummary aicpe;
  std::optional<SampleSummary> icpe;
  std::optional<SampleSummary> picppe;
  std::size_t non_converged = 0;
};

ScenarioResult run_scenario(const ScenarioRunConfig& config);

std::string scenario_result_json(const ScenarioResult& result);
// Coefficient table: key, truth, mean, [p2.5, p97.5], mean offset; then the
// metric rows.
std::string scenario_table(const ScenarioResult& result);

}  // namespace mta

#endif  // MTA_SCENARIO_H_
