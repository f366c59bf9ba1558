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

#include <cmath>
#include <filesystem>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mta/error.h"
#include "mta/simulator.h"
#include "test_support.h"

namespace mta {
namespace {

ScenarioConfig config_for(Scenario s, std::size_t users, double unexposed = 0.0) {
  ScenarioConfig c;
  c.scenario = s;
  c.users = users;
  c.datasets = 1;
  c.unexposed_fraction = unexposed;
  return c;
}

std::string dump(const std::vector<UserPath>& paths) {
  std::ostringstream out;
  write_paths(out, paths);
  return out.str();
}

CustomScenario flat_scenario(double alpha) {
  CustomScenario c;
  c.truth.spec.terms.push_back(testing::step_term("ad", {1.0, 30.0}));
  c.truth.coefficients[CoefficientKey::intercept()] = alpha;
  c.truth.coefficients[CoefficientKey::term("ad", 0)] = 0.0;
  c.truth.coefficients[CoefficientKey::term("ad", 1)] = 0.0;
  c.ads = {1.0, 0, 4};
  c.ad_features = {{"colour", {"red", "blue"}}};
  return c;
}

TEST(RngStream, DeterministicAndDistinct) {
  Rng a = rng_stream(42, 0, 7);
  Rng b = rng_stream(42, 0, 7);
  EXPECT_EQ(a(), b());
  EXPECT_NE(rng_stream(42, 0, 7)(), rng_stream(42, 1, 7)());
  EXPECT_NE(rng_stream(42, 0, 7)(), rng_stream(42, 0, 8)());
  EXPECT_NE(rng_stream(42, 0, 7)(), rng_stream(43, 0, 7)());
}

TEST(SimulateDataset, ReproducibleAcrossRunsAndWorkers) {
  const ScenarioConfig c = config_for(Scenario::kS4, 3000, 0.5);
  const std::string one = dump(simulate_dataset(c, 0, 1));
  EXPECT_EQ(one, dump(simulate_dataset(c, 0, 1)));
  EXPECT_EQ(one, dump(simulate_dataset(c, 0, 4)));
  EXPECT_NE(one, dump(simulate_dataset(c, 1, 1)));
}

TEST(SimulateDataset, ScenarioOneLayout) {
  const ScenarioConfig c = config_for(Scenario::kS1, 500, 0.5);
  const auto paths = simulate_dataset(c, 3);
  ASSERT_EQ(paths.size(), 1000u);
  EXPECT_EQ(paths[0].user_id, "d3u0");
  EXPECT_EQ(paths[500].user_id, "d3c0");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const UserPath& p = paths[i];
    EXPECT_NO_THROW(validate_path(p));
    const auto queries = query_event_indices(p, false);
    ASSERT_EQ(queries.size(), 1u);
    const Event& q = p.events[queries[0]];
    EXPECT_GE(q.t, 0.0);
    EXPECT_LT(q.t, 30.0);
    EXPECT_EQ(q.shown, i < 500);
    EXPECT_EQ(p.user_features.at("arm"), i < 500 ? "exposed" : "unexposed");
  }
}

TEST(SimulateDataset, ScenarioTwoHasOneAdOfEachType) {
  for (const UserPath& p : simulate_dataset(config_for(Scenario::kS2, 300), 0)) {
    const auto ads = query_event_indices(p, true);
    ASSERT_EQ(ads.size(), 2u);
    std::set<std::string> types;
    for (std::size_t i : ads) types.insert(p.events[i].features.at("type"));
    EXPECT_EQ(types, (std::set<std::string>{"1", "2"}));
  }
}

TEST(SimulateDataset, ScenarioFourAdCountShares) {
  const ScenarioConfig c = config_for(Scenario::kS4, 1000000);
  std::array<double, 4> counts{};
  double type1 = 0.0;
  double ads = 0.0;
  for (const UserPath& p : simulate_dataset(c, 0, 4)) {
    const auto idx = query_event_indices(p, true);
    ASSERT_GE(idx.size(), 1u);
    ASSERT_LE(idx.size(), 3u);
    counts[idx.size()] += 1.0;
    for (std::size_t i : idx) type1 += p.events[i].features.at("type") == "1";
    ads += static_cast<double>(idx.size());
  }
  EXPECT_NEAR(counts[1] / 1e6, 0.406, 0.002);
  EXPECT_NEAR(counts[2] / 1e6, 0.271, 0.002);
  EXPECT_NEAR(counts[3] / 1e6, 0.323, 0.002);
  EXPECT_NEAR(type1 / ads, 0.5, 0.002);
}

TEST(SimulateDataset, ZeroBaselineGivesNoConversions) {
  ScenarioConfig c = config_for(Scenario::kCustom, 1);
  c.custom = flat_scenario(-700.0);
  const auto paths = simulate_dataset(c, 0);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(conversion_count(paths[0]), 0u);
}

TEST(SimulateDataset, MeanConversionsPerUserWithoutEffects) {
  ScenarioConfig c = config_for(Scenario::kCustom, 100000);
  c.custom = flat_scenario(std::log(1.0 / 30.0));
  double total = 0.0;
  for (const UserPath& p : simulate_dataset(c, 0, 4)) total += static_cast<double>(conversion_count(p));
  EXPECT_NEAR(total / 100000.0, 1.0, 4.0 * std::sqrt(1.0 / 100000.0));
}

TEST(SimulateDataset, UnexposedUsersConvertAtBaseline) {
  const ScenarioConfig c = config_for(Scenario::kS1, 50000, 0.5);
  const auto paths = simulate_dataset(c, 0, 4);
  double conversions = 0.0;
  for (std::size_t i = 50000; i < paths.size(); ++i) {
    conversions += static_cast<double>(conversion_count(paths[i]));
  }
  EXPECT_NEAR(conversions / 50000.0, 1.0, 4.0 * std::sqrt(1.0 / 50000.0));
}

TEST(SimulateDataset, FirstDayRateIsDoubled) {
  const ScenarioConfig c = config_for(Scenario::kS1, 100000);
  double conversions = 0.0;
  double exposure = 0.0;
  for (const UserPath& p : simulate_dataset(c, 0, 4)) {
    const Time t1 = p.events[query_event_indices(p, true)[0]].t;
    const Time hi = std::min(t1 + 1.0, 30.0);
    exposure += hi - t1;
    conversions += static_cast<double>(conversions_in(p, t1, hi));
  }
  const double rate = conversions / exposure;
  EXPECT_NEAR(rate, 2.0 / 30.0, 4.0 * std::sqrt(conversions) / exposure);
}

TEST(SimulateDataset, PairedUnexposedUsersShareQueryTimes) {
  ScenarioConfig c = config_for(Scenario::kS2, 100, 0.5);
  c.unexposed_mode = UnexposedMode::kPaired;
  const auto paths = simulate_dataset(c, 0);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& exposed = paths[i];
    const auto& twin = paths[100 + i];
    const auto a = query_event_indices(exposed, false);
    const auto b = query_event_indices(twin, false);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_DOUBLE_EQ(exposed.events[a[k]].t, twin.events[b[k]].t);
      EXPECT_FALSE(twin.events[b[k]].shown);
    }
  }
}

TEST(SimulateDataset, CustomScenarioDrawsFeatureLevels) {
  ScenarioConfig c = config_for(Scenario::kCustom, 2000);
  c.custom = flat_scenario(std::log(0.05));
  std::set<std::string> colours;
  std::array<int, 5> counts{};
  for (const UserPath& p : simulate_dataset(c, 0)) {
    const auto ads = query_event_indices(p, true);
    ASSERT_LE(ads.size(), 4u);
    ++counts[ads.size()];
    for (std::size_t i : ads) colours.insert(p.events[i].features.at("colour"));
  }
  EXPECT_EQ(colours, (std::set<std::string>{"blue", "red"}));
  EXPECT_GT(counts[0], 0);  // min 0 allows users without ads
}

TEST(ScenarioConfig, UnexposedCountAndValidation) {
  ScenarioConfig c;
  c.users = 200000;
  c.unexposed_fraction = 0.5;
  EXPECT_EQ(c.unexposed_users(), 200000u);
  c.unexposed_fraction = 0.2;
  EXPECT_EQ(c.unexposed_users(), 50000u);
  c.unexposed_fraction = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.unexposed_fraction = 0.0;
  c.users = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.users = 1;
  c.scenario = Scenario::kCustom;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const ScenarioConfig big = full_scale(ScenarioConfig{});
  EXPECT_EQ(big.users, 1000000u);
  EXPECT_EQ(big.datasets, 500u);
}

TEST(ScenarioTruth, Multipliers) {
  const auto s1 = scenario_true_multipliers(config_for(Scenario::kS1, 1));
  EXPECT_NEAR(s1.at(CoefficientKey::intercept()), 1.0 / 30.0, 1e-15);
  EXPECT_NEAR(s1.at(CoefficientKey::term("ad", 1)), 1.5, 1e-12);
  const auto s3 = scenario_true_multipliers(config_for(Scenario::kS3, 1));
  EXPECT_NEAR(s3.at(CoefficientKey::term("type2", 0)), 1.0, 1e-15);
  EXPECT_NEAR(s3.at(CoefficientKey::term("type1", 0)), 2.0, 1e-12);
  const auto s4 = scenario_true_multipliers(config_for(Scenario::kS4, 1));
  EXPECT_NEAR(s4.at(CoefficientKey::term("type1", 0, 3)), 8.0, 1e-12);
  EXPECT_NEAR(s4.at(CoefficientKey::term("type1", 2, 3)), 1.728, 1e-12);
  EXPECT_NEAR(s4.at(CoefficientKey::term("type1", 2, 2)), 1.44, 1e-12);
  EXPECT_NEAR(s4.at(CoefficientKey::term("type2", 2, 3)), 1.0, 1e-12);
  EXPECT_EQ(scenario_fit_spec(config_for(Scenario::kS2, 1)),
            scenario_truth(config_for(Scenario::kS2, 1)).spec);
}

TEST(ScenarioNames, Parse) {
  EXPECT_EQ(parse_scenario("1"), Scenario::kS1);
  EXPECT_EQ(parse_scenario("S4"), Scenario::kS4);
  EXPECT_EQ(parse_scenario(to_string(Scenario::kCustom)), Scenario::kCustom);
  EXPECT_THROW(parse_scenario("s5"), std::invalid_argument);
}

TEST(CustomScenarioJson, RoundTripAndErrors) {
  const CustomScenario c = flat_scenario(-2.0);
  const CustomScenario back = custom_scenario_from_json(custom_scenario_to_json(c));
  EXPECT_EQ(back.truth, c.truth);
  EXPECT_EQ(back.ad_features, c.ad_features);
  EXPECT_EQ(back.ads.max, 4);
  EXPECT_THROW(custom_scenario_from_json("{\"schema\":\"mta-scenario/1\"}"), DataError);
  EXPECT_THROW(custom_scenario_from_json("{\"schema\":\"mta-paths/1\",\"model\":{}}"), DataError);
  EXPECT_THROW(custom_scenario_from_json("not json"), DataError);
}

TEST(WriteCorpus, FilesAndManifest) {
  const auto dir = std::filesystem::temp_directory_path() / "mta_write_corpus_test";
  std::filesystem::remove_all(dir);
  ScenarioConfig c = config_for(Scenario::kS1, 50);
  c.datasets = 2;
  c.seed = 7;
  const auto files = write_corpus(c, dir.string());
  EXPECT_EQ(files, (std::vector<std::string>{"ds0.jsonl", "ds1.jsonl"}));
  std::ifstream manifest(dir / "manifest.json");
  const auto doc = nlohmann::json::parse(manifest);
  EXPECT_EQ(doc.at("seed").get<std::uint64_t>(), 7u);
  EXPECT_EQ(doc.at("schema"), "mta-manifest/1");
  const auto loaded = load_paths_file((dir / "ds1.jsonl").string());
  EXPECT_EQ(loaded, simulate_dataset(c, 1));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mta
