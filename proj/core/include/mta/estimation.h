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

// Maximum-likelihood fitting of an IntensityModel. Each path is cut into
// constant-intensity segments; each segment is a Poisson regression row with
// the conversion count as response and the segment length as exposure.

#ifndef MTA_ESTIMATION_H_
#define MTA_ESTIMATION_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mta/events.h"
#include "mta/intensity.h"

namespace mta {

inline constexpr std::string_view kFitReportSchema = "fit-report/1";

// Coefficients driven towards -infinity (a key active only where nothing
// converts) are held here and reported.
inline constexpr double kCoefficientFloor = -30.0;

enum class StepControl { kNewtonWithHalving, kGradientDescent };

struct FitConfig {
  int max_iterations = 100;
  // On the max-norm of the (projected) gradient.
  double gradient_tolerance = 1e-8;
  // Penalty ridge_penalty * sum(beta^2) over all but the global intercept.
  double ridge_penalty = 0.0;
  StepControl step_control = StepControl::kNewtonWithHalving;
  double learning_rate = 1e-3;  // kGradientDescent only
  int workers = 1;

  void validate() const;
};

struct FitResult {
  IntensityModel model;
  double final_log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_max_norm = 0.0;
  std::map<CoefficientKey, double> per_key_offset;
  // Spec keys never active in the corpus; left out of the model.
  std::vector<CoefficientKey> dropped_keys;
  // Keys that ended at kCoefficientFloor.
  std::vector<CoefficientKey> floored_keys;
  std::vector<double> likelihood_trace;
  std::vector<std::string> warnings;
};

// sum over segments of -exp(eta) * exposure + conversions * (eta + log
// exposure). The -log(conversions!) constant is left out. Throws ModelError
// when a segment activates a key the model does not have.
double log_likelihood(const IntensityModel& model,
                      std::span<const Segment> segments);

// d log_likelihood / d coefficient for every model coefficient.
std::map<CoefficientKey, double> log_likelihood_gradient(
    const IntensityModel& model, std::span<const Segment> segments);

// Throws DataError when the corpus has no conversions or the spec cannot be
// segmented. Non-convergence is reported through FitResult::converged.
FitResult fit(const ModelSpec& spec, std::span<const UserPath> paths,
              const FitConfig& config = {});

struct FitDiagnostics {
  double log_likelihood = 0.0;
  double poisson_loss = 0.0;  // mean per-segment deviance
  double predicted_conversions = 0.0;
  double observed_conversions = 0.0;
  // predicted / observed - 1; empty when nothing was observed.
  std::optional<double> prediction_bias;
  std::size_t segments = 0;
};

FitDiagnostics fit_diagnostics(const IntensityModel& model,
                               std::span<const Segment> segments);

// Diagnostics per level of a user feature. Paths without the feature are
// grouped under "(missing)".
std::map<std::string, FitDiagnostics> sliced_fit_diagnostics(
    const IntensityModel& model, std::span<const UserPath> paths,
    const std::string& user_feature);

// Across-replicate summary of exp(coefficient).
struct ReplicateStat {
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  std::size_t replicates = 0;
};

// Linear-interpolation (type 7) sample quantile.
double quantile_type7(std::vector<double> values, double p);

// Keys missing from some replicates are summarized over the replicates that
// have them. Throws std::invalid_argument for fewer than two replicates and
// ModelError when the specs differ.
std::map<CoefficientKey, ReplicateStat> replicate_summary(
    std::span<const IntensityModel> estimates);

std::string fit_report_json(const FitResult& result);

}  // namespace mta

#endif  // MTA_ESTIMATION_H_
