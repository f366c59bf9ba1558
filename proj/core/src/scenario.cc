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

#include "mta/scenario.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json_util.h"
#include "mta/evaluation.h"

namespace mta {
namespace {

using internal::Json;

Json summary_json(const SampleSummary& s) {
  return Json{{"mean", s.mean}, {"q025", s.q025}, {"q975", s.q975},
              {"replicates", s.replicates}};
}

std::string format(const char* fmt, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, fmt, value);
  return buffer;
}

std::string percent_row(const std::string& name, const SampleSummary& s) {
  return name + "  " + format("%.3f%%", 100.0 * s.mean) + "  [" +
         format("%.3f%%", 100.0 * s.q025) + ", " + format("%.3f%%", 100.0 * s.q975) + "]\n";
}

}  // namespace

SampleSummary summarize(const std::vector<double>& values) {
  SampleSummary s;
  s.replicates = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.q025 = quantile_type7(values, 0.025);
  s.q975 = quantile_type7(values, 0.975);
  return s;
}

ScenarioResult run_scenario(const ScenarioRunConfig& config) {
  config.scenario.validate();
  ScenarioResult result;
  result.config = config.scenario;
  result.truth = scenario_true_multipliers(config.scenario);
  const ModelSpec spec = scenario_fit_spec(config.scenario);
  FitConfig fit_config = config.fit;
  fit_config.workers = config.workers;
  AttributionConfig attribution = config.attribution;
  attribution.normalization = Normalization::kNormalized;

  std::vector<double> aicpe_values;
  std::vector<double> icpe_values;
  std::vector<double> picppe_values;
  std::vector<IntensityModel> models;
  for (std::size_t d = 0; d < config.scenario.datasets; ++d) {
    Corpus corpus = split_by_arm(simulate_dataset(config.scenario, d, config.workers));
    FitResult fitted = fit(spec, corpus.exposed, fit_config);
    DatasetOutcome outcome;
    outcome.index = d;
    outcome.converged = fitted.converged;
    outcome.offsets = std::move(fitted.per_key_offset);
    outcome.model = std::move(fitted.model);
    if (!outcome.converged) ++result.non_converged;

    const CorpusStats stats =
        corpus_stats(corpus, &outcome.model, attribution, nullptr, config.workers);
    GroupTotals exposed;
    GroupTotals unexposed;
    for (const UserStats& u : stats.exposed) exposed.add(u);
    for (const UserStats& u : stats.unexposed) unexposed.add(u);
    outcome.aicpe = metric_value(Metric::kAICPE, exposed, unexposed);
    aicpe_values.push_back(outcome.aicpe);
    if (!corpus.unexposed.empty()) {
      outcome.icpe = metric_value(Metric::kICPE, exposed, unexposed);
      outcome.picppe = metric_value(Metric::kPICPPE, exposed, unexposed);
      icpe_values.push_back(*outcome.icpe);
      picppe_values.push_back(*outcome.picppe);
    }
    if (config.log) {
      std::ostringstream line;
      line.precision(6);
      line << "dataset " << d << ": converged=" << (outcome.converged ? "yes" : "no")
           << " aicpe=" << outcome.aicpe;
      if (outcome.icpe) line << " icpe=" << *outcome.icpe;
      config.log(line.str());
    }
    models.push_back(outcome.model);
    result.datasets.push_back(std::move(outcome));
  }

  if (models.size() >= 2) {
    result.estimates = replicate_summary(models);
  } else {
    for (const auto& [key, value] : models.front().coefficients) {
      const double v = std::exp(value);
      result.estimates[key] = {v, v, v, 1};
    }
  }
  for (const DatasetOutcome& d : result.datasets) {
    for (const auto& [key, offset] : d.offsets) result.mean_offsets[key] += offset;
  }
  for (auto& [key, total] : result.mean_offsets) {
    total /= static_cast<double>(result.datasets.size());
  }
  result.aicpe = summarize(aicpe_values);
  if (!icpe_values.empty()) {
    result.icpe = summarize(icpe_values);
    result.picppe = summarize(picppe_values);
  }
  return result;
}

std::string scenario_result_json(const ScenarioResult& result) {
  Json coefficients = Json::array();
  std::map<CoefficientKey, bool> keys;
  for (const auto& [key, v] : result.truth) keys[key] = true;
  for (const auto& [key, v] : result.estimates) keys[key] = true;
  for (const auto& [key, unused] : keys) {
    Json entry{{"key", key.label()}};
    if (auto it = result.truth.find(key); it != result.truth.end()) {
      entry["truth"] = it->second;
    }
    if (auto it = result.estimates.find(key); it != result.estimates.end()) {
      entry["mean"] = it->second.mean;
      entry["q025"] = it->second.q025;
      entry["q975"] = it->second.q975;
      entry["replicates"] = it->second.replicates;
    }
    if (auto it = result.mean_offsets.find(key); it != result.mean_offsets.end()) {
      entry["mean_offset_days"] = it->second;
    }
    coefficients.push_back(std::move(entry));
  }
  Json doc{{"schema", kScenarioResultSchema},
           {"scenario", to_string(result.config.scenario)},
           {"users", result.config.users},
           {"unexposed_users", result.config.unexposed_users()},
           {"datasets", result.config.datasets},
           {"seed", result.config.seed},
           {"window_days", result.config.window_days},
           {"non_converged", result.non_converged},
           {"coefficients", coefficients},
           {"aicpe", summary_json(result.aicpe)}};
  if (result.icpe) doc["icpe"] = summary_json(*result.icpe);
  if (result.picppe) doc["picppe"] = summary_json(*result.picppe);
  return doc.dump(2);
}

std::string scenario_table(const ScenarioResult& result) {
  std::ostringstream out;
  out << "scenario " << to_string(result.config.scenario) << ": " << result.config.users
      << " users x " << result.config.datasets << " datasets, seed " << result.config.seed
      << "\n";
  out << "key  truth  mean  [p2.5, p97.5]  mean_offset_days\n";
  for (const auto& [key, stat] : result.estimates) {
    out << key.label() << "  ";
    auto truth = result.truth.find(key);
    out << (truth == result.truth.end() ? std::string("-") : format("%.4f", truth->second));
    out << "  " << format("%.4f", stat.mean) << "  [" << format("%.4f", stat.q025) << ", "
        << format("%.4f", stat.q975) << "]";
    auto offset = result.mean_offsets.find(key);
    if (offset != result.mean_offsets.end()) out << "  " << format("%.0f", offset->second);
    out << "\n";
  }
  out << percent_row("AICPE", result.aicpe);
  if (result.icpe) out << percent_row("ICPE", *result.icpe);
  if (result.picppe) out << percent_row("PICPPE", *result.picppe);
  if (result.non_converged > 0) {
    out << "non-converged fits: " << result.non_converged << "\n";
  }
  return out.str();
}

}  // namespace mta
