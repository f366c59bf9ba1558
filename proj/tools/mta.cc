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

// mta: simulate, fit, attribute, evaluate and reproduce scenarios.
//
// Exit codes: 0 success, 2 usage, 3 fit did not converge, 4 data or schema
// error, 1 anything else.

#include <fstream>
#include <map>
#include <optional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mta/attribution.h"
#include "mta/error.h"
#include "mta/estimation.h"
#include "mta/evaluation.h"
#include "mta/events.h"
#include "mta/intensity.h"
#include "mta/scenario.h"
#include "mta/simulator.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitData = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void log_line(const std::string& line) { std::cerr << "mta: " << line << '\n'; }

std::string read_file(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  if (!in) throw mta::DataError("cannot open '" + filename + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

// Writes to `filename`, or stdout when it is empty or "-".
void emit(const std::string& filename, const std::string& text) {
  if (filename.empty() || filename == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  mta::write_text_file(filename, text);
}

std::vector<mta::UserPath> load_all(const std::vector<std::string>& files) {
  std::vector<mta::UserPath> paths;
  for (const std::string& f : files) {
    std::vector<mta::UserPath> part = mta::load_paths_file(f);
    paths.insert(paths.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
  }
  return paths;
}

struct ScenarioFlags {
  std::string id = "1";
  std::string scenario_file;
  std::size_t users = 200000;
  std::size_t datasets = 50;
  std::uint64_t seed = 42;
  double window = 30.0;
  double unexposed_fraction = 0.0;
  bool paired = false;
  bool full = false;

  void add_to(CLI::App& cmd, const char* id_flag) {
    cmd.add_option(id_flag, id, "Scenario: 1, 2, 3, 4 or custom")->capture_default_str();
    cmd.add_option("--scenario-file", scenario_file,
                   "mta-scenario/1 document for the custom scenario")
        ->check(CLI::ExistingFile);
    cmd.add_option("--users", users, "Exposed users per dataset")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--datasets", datasets, "Number of datasets")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd.add_option("--window", window, "Observation window in days")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--unexposed-fraction", unexposed_fraction,
                   "Share of counterfactual users with ads withheld")
        ->check(CLI::Range(0.0, 0.999999))
        ->capture_default_str();
    cmd.add_flag("--paired", paired, "Counterfactual users copy exposed query times");
    cmd.add_flag("--full-scale", full, "1e6 users x 500 datasets");
  }

  mta::ScenarioConfig config() const {
    mta::ScenarioConfig c;
    try {
      c.scenario = mta::parse_scenario(id);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (c.scenario == mta::Scenario::kCustom) {
      if (scenario_file.empty()) throw UsageError("custom scenario needs --scenario-file");
      c.custom = mta::custom_scenario_from_json(read_file(scenario_file));
    } else if (!scenario_file.empty()) {
      throw UsageError("--scenario-file only applies to the custom scenario");
    }
    c.users = users;
    c.datasets = datasets;
    c.seed = seed;
    c.window_days = window;
    c.unexposed_fraction = unexposed_fraction;
    c.unexposed_mode = paired ? mta::UnexposedMode::kPaired : mta::UnexposedMode::kIndependent;
    if (full) c = mta::full_scale(c);
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

struct FitFlags {
  double ridge = 0.0;
  int max_iterations = 100;
  double tolerance = 1e-8;
  std::string optimizer = "newton";
  double learning_rate = 1e-3;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--ridge", ridge, "Ridge penalty on non-intercept coefficients")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd.add_option("--max-iterations", max_iterations)->check(CLI::PositiveNumber)->capture_default_str();
    cmd.add_option("--tolerance", tolerance, "Gradient max-norm tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--optimizer", optimizer)
        ->check(CLI::IsMember({"newton", "gradient"}))
        ->capture_default_str();
    cmd.add_option("--learning-rate", learning_rate, "Gradient optimizer step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  mta::FitConfig config(int workers) const {
    mta::FitConfig c;
    c.ridge_penalty = ridge;
    c.max_iterations = max_iterations;
    c.gradient_tolerance = tolerance;
    c.step_control = optimizer == "gradient" ? mta::StepControl::kGradientDescent
                                             : mta::StepControl::kNewtonWithHalving;
    c.learning_rate = learning_rate;
    c.workers = workers;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-touch attribution with Poisson-process conversion models"};
  app.require_subcommand(1);
  app.fallthrough();
  int workers = 1;
  app.add_option("--workers", workers, "Worker threads; outputs do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // simulate
  CLI::App* simulate = app.add_subcommand("simulate", "Write simulated path corpora");
  ScenarioFlags sim_flags;
  sim_flags.add_to(*simulate, "--scenario");
  std::string sim_out;
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // spec
  CLI::App* spec_cmd = app.add_subcommand("spec", "Print the model spec fitted for a scenario");
  ScenarioFlags spec_flags;
  spec_flags.add_to(*spec_cmd, "--scenario");
  std::string spec_out;
  spec_cmd->add_option("--out", spec_out, "Output file (default stdout)");
  bool spec_truth = false;
  spec_cmd->add_flag("--truth", spec_truth, "Print the generating model instead");

  // fit
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model to path data");
  std::vector<std::string> fit_paths;
  std::string fit_spec;
  std::string fit_out;
  std::string fit_report;
  bool fit_exposed_only = false;
  FitFlags fit_flags;
  fit_cmd->add_option("--paths", fit_paths, "Path files (mta-paths/1)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--spec", fit_spec, "Model spec (mta-model/1)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", fit_out, "Model output file")->required();
  fit_cmd->add_option("--report", fit_report, "Fit report output (default stdout)");
  fit_cmd->add_flag("--exposed-only", fit_exposed_only, "Fit on users with arm=exposed only");
  fit_flags.add_to(*fit_cmd);

  // attribute
  CLI::App* attribute_cmd = app.add_subcommand("attribute", "Assign credit per conversion");
  std::string attr_model;
  std::vector<std::string> attr_paths;
  std::string attr_out;
  std::string attr_rule = "backwards_elimination";
  std::string attr_norm = "normalized";
  bool attr_incremental = false;
  std::size_t attr_cap = mta::kDefaultShapleyMaxAds;
  attribute_cmd->add_option("--model", attr_model)->required()->check(CLI::ExistingFile);
  attribute_cmd->add_option("--paths", attr_paths)->required()->check(CLI::ExistingFile);
  attribute_cmd->add_option("--out", attr_out, "Credit output (default stdout)");
  attribute_cmd->add_option("--rule", attr_rule)
      ->check(CLI::IsMember({"backwards_elimination", "be", "shapley"}))
      ->capture_default_str();
  attribute_cmd->add_option("--normalization", attr_norm)
      ->check(CLI::IsMember({"raw", "normalized", "non_baseline_normalized", "nonbaseline"}))
      ->capture_default_str();
  attribute_cmd->add_flag("--incremental", attr_incremental,
                          "Credit ad effects only; query effects stay in the baseline");
  attribute_cmd->add_option("--shapley-max-ads", attr_cap)->check(CLI::PositiveNumber)->capture_default_str();

  // evaluate
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Incrementality metrics");
  std::vector<std::string> eval_paths;
  std::string eval_credits;
  std::string eval_model;
  std::vector<std::string> eval_metrics;
  std::size_t eval_replicates = 200;
  std::uint64_t eval_seed = 1;
  std::string eval_slice;
  std::string eval_format = "json";
  std::string eval_out;
  std::size_t eval_jackknife = 0;
  evaluate_cmd->add_option("--paths", eval_paths, "Corpus with arm=exposed/unexposed users")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--credits", eval_credits, "Normalized credit records (AICPE)")
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--model", eval_model, "Model for PICPU/PICPPE")->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--metrics", eval_metrics, "Metrics (default: all computable)")
      ->delimiter(',');
  evaluate_cmd->add_option("--replicates", eval_replicates, "Bootstrap replicates (0: none)")
      ->capture_default_str();
  evaluate_cmd->add_option("--seed", eval_seed)->capture_default_str();
  evaluate_cmd->add_option("--slice", eval_slice, "User feature to slice on");
  evaluate_cmd->add_option("--jackknife-blocks", eval_jackknife,
                           "Replace the bootstrap with a block jackknife");
  evaluate_cmd->add_option("--format", eval_format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  evaluate_cmd->add_option("--out", eval_out, "Report output (default stdout)");

  // scenario
  CLI::App* scenario_cmd = app.add_subcommand("scenario", "Simulate, fit and summarize a scenario");
  ScenarioFlags run_flags;
  run_flags.unexposed_fraction = 0.5;
  run_flags.add_to(*scenario_cmd, "--id");
  FitFlags run_fit;
  run_fit.add_to(*scenario_cmd);
  std::string run_format = "table";
  std::string run_out;
  scenario_cmd->add_option("--format", run_format)
      ->check(CLI::IsMember({"table", "json", "csv"}))
      ->capture_default_str();
  scenario_cmd->add_option("--out", run_out, "Output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) {
      const mta::ScenarioConfig config = sim_flags.config();
      const auto files = mta::write_corpus(config, sim_out, workers);
      log_line("wrote " + std::to_string(files.size()) + " dataset(s) to " + sim_out);
      return 0;
    }
    if (*spec_cmd) {
      const mta::ScenarioConfig config = spec_flags.config();
      if (spec_truth) {
        emit(spec_out, mta::model_to_json(mta::scenario_truth(config)) + "\n");
      } else {
        emit(spec_out, mta::spec_to_json(mta::scenario_fit_spec(config)) + "\n");
      }
      return 0;
    }
    if (*fit_cmd) {
      const mta::ModelSpec spec = mta::read_spec_file(fit_spec);
      std::vector<mta::UserPath> paths = load_all(fit_paths);
      if (fit_exposed_only) paths = mta::split_by_arm(std::move(paths)).exposed;
      if (paths.empty()) throw mta::DataError("empty corpus");
      const mta::FitResult result = mta::fit(spec, paths, fit_flags.config(workers));
      mta::write_text_file(fit_out, mta::model_to_json(result.model) + "\n");
      emit(fit_report, mta::fit_report_json(result) + "\n");
      for (const std::string& w : result.warnings) log_line("warning: " + w);
      if (!result.converged) {
        log_line("fit did not converge");
        return kExitNotConverged;
      }
      return 0;
    }
    if (*attribute_cmd) {
      const mta::IntensityModel model = mta::read_model_file(attr_model);
      model.validate();
      const std::vector<mta::UserPath> paths = load_all(attr_paths);
      mta::AttributionConfig config;
      config.rule = mta::parse_rule(attr_rule);
      config.normalization = mta::parse_normalization(attr_norm);
      config.incremental = attr_incremental;
      config.shapley_max_ads = attr_cap;
      std::string text;
      for (const std::string& line : mta::attribute_corpus(model, paths, config, workers)) {
        text += line;
        text += '\n';
      }
      emit(attr_out, text);
      return 0;
    }
    if (*evaluate_cmd) {
      const mta::Corpus corpus = mta::split_by_arm(load_all(eval_paths));
      std::optional<mta::IntensityModel> model;
      if (!eval_model.empty()) model = mta::read_model_file(eval_model);
      std::optional<std::map<std::string, double>> credit;
      if (!eval_credits.empty()) {
        std::ifstream in(eval_credits);
        credit = mta::load_credit_totals(in);
      }
      const mta::CorpusStats stats = mta::corpus_stats(
          corpus, model ? &*model : nullptr, {}, credit ? &*credit : nullptr, workers);
      std::vector<mta::Metric> metrics;
      if (eval_metrics.empty()) {
        metrics = {mta::Metric::kICPU, mta::Metric::kICPT, mta::Metric::kICPE,
                   mta::Metric::kICPEPrime};
        if (stats.has_predictions) {
          metrics.push_back(mta::Metric::kPICPU);
          metrics.push_back(mta::Metric::kPICPPE);
        }
        if (stats.has_credit) metrics.push_back(mta::Metric::kAICPE);
      } else {
        for (const std::string& name : eval_metrics) {
          try {
            metrics.push_back(mta::parse_metric(name));
          } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
          }
        }
      }
      mta::BootstrapConfig boot;
      boot.replicates = eval_replicates;
      boot.seed = eval_seed;
      boot.workers = workers;
      std::vector<mta::MetricReport> reports;
      if (!eval_slice.empty()) {
        for (mta::Metric m : metrics) {
          for (auto& r : mta::sliced_metrics(m, corpus, stats, eval_slice, boot)) {
            reports.push_back(std::move(r));
          }
        }
      } else if (eval_jackknife > 0) {
        boot.replicates = 0;
        reports = mta::metric_reports(metrics, stats, boot);
        for (mta::MetricReport& r : reports) {
          const mta::Interval ci = mta::block_jackknife_ci(
              mta::stats_metric(r.metric, stats), stats.exposed.size(),
              stats.unexposed.size(), eval_jackknife);
          r.ci_low = ci.low;
          r.ci_high = ci.high;
          r.replicates = ci.replicates;
        }
      } else {
        reports = mta::metric_reports(metrics, stats, boot);
      }
      emit(eval_out, eval_format == "csv" ? mta::report_csv(reports)
                                          : mta::report_json(reports) + "\n");
      return 0;
    }
    if (*scenario_cmd) {
      mta::ScenarioRunConfig config;
      config.scenario = run_flags.config();
      config.fit = run_fit.config(workers);
      config.workers = workers;
      config.log = log_line;
      const mta::ScenarioResult result = mta::run_scenario(config);
      if (run_format == "json") {
        emit(run_out, mta::scenario_result_json(result) + "\n");
      } else if (run_format == "csv") {
        std::ostringstream csv;
        csv.precision(17);
        csv << "key,truth,mean,q025,q975,mean_offset_days\n";
        for (const auto& [key, stat] : result.estimates) {
          csv << key.label() << ',';
          if (auto it = result.truth.find(key); it != result.truth.end()) csv << it->second;
          csv << ',' << stat.mean << ',' << stat.q025 << ',' << stat.q975 << ',';
          if (auto it = result.mean_offsets.find(key); it != result.mean_offsets.end()) {
            csv << it->second;
          }
          csv << '\n';
        }
        auto row = [&](const char* name, const mta::SampleSummary& s) {
          csv << name << ",," << s.mean << ',' << s.q025 << ',' << s.q975 << ",\n";
        };
        row("AICPE", result.aicpe);
        if (result.icpe) row("ICPE", *result.icpe);
        if (result.picppe) row("PICPPE", *result.picppe);
        emit(run_out, csv.str());
      } else {
        emit(run_out, mta::scenario_table(result));
      }
      return result.non_converged > 0 ? kExitNotConverged : 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "mta: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mta::DataError& e) {
    std::cerr << "mta: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const mta::ModelError& e) {
    std::cerr << "mta: model error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "mta: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
