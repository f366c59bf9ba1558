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

#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <vector>

#include "mta/attribution.h"
#include "mta/estimation.h"
#include "mta/intensity.h"
#include "mta/simulator.h"

namespace {

mta::ScenarioConfig small(mta::Scenario scenario, std::size_t users) {
  mta::ScenarioConfig c;
  c.scenario = scenario;
  c.users = users;
  c.datasets = 1;
  return c;
}

void BM_SimulateDataset(benchmark::State& state) {
  const auto config = small(mta::Scenario::kS2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mta::simulate_dataset(config, 0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateDataset)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SegmentPath(benchmark::State& state) {
  const auto config = small(mta::Scenario::kS4, 2000);
  const auto paths = mta::simulate_dataset(config, 0);
  const auto spec = mta::scenario_fit_spec(config);
  for (auto _ : state) {
    std::size_t n = 0;
    for (const auto& p : paths) n += mta::segment_path(spec, p).size();
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(paths.size()));
}
BENCHMARK(BM_SegmentPath)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  const auto config = small(mta::Scenario::kS2, static_cast<std::size_t>(state.range(0)));
  const auto paths = mta::simulate_dataset(config, 0);
  const auto spec = mta::scenario_fit_spec(config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mta::fit(spec, paths));
  }
}
BENCHMARK(BM_Fit)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Shapley(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  mta::IntensityModel model;
  model.spec.terms.push_back({"ad", mta::EffectKind::kAd, {mta::StepBasis{{1.0, 30.0}}}, {}});
  model.coefficients[mta::CoefficientKey::intercept()] = std::log(1.0 / 30.0);
  model.coefficients[mta::CoefficientKey::term("ad", 0)] = 0.6;
  model.coefficients[mta::CoefficientKey::term("ad", 1)] = 0.2;
  mta::UserPath path;
  path.user_id = "u";
  path.window = {0.0, 30.0};
  for (int i = 0; i < n; ++i) {
    path.events.push_back({mta::EventKind::kAdQuery, 1.0 + i * 0.5, true, {}});
  }
  path.events.push_back({mta::EventKind::kConversion, 1.0 + n * 0.5, true, {}});
  for (auto _ : state) {
    benchmark::DoNotOptimize(mta::shapley(model, path, 0,
                                          mta::Normalization::kNormalized, false, 20));
  }
}
BENCHMARK(BM_Shapley)->DenseRange(4, 12, 4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
