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

// Incrementality metrics of an exposed/unexposed experiment, their
// model-predicted and attribution-based counterparts, and bootstrap
// intervals over users.

#ifndef MTA_EVALUATION_H_
#define MTA_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mta/attribution.h"
#include "mta/events.h"
#include "mta/intensity.h"

namespace mta {

inline constexpr std::string_view kReportSchema = "mta-report/1";
inline constexpr std::string_view kArmFeature = "arm";

enum class Metric { kICPU, kICPT, kICPE, kICPEPrime, kPICPU, kPICPPE, kAICPE };

std::string_view to_string(Metric metric);
// Accepts the names printed by to_string, case-insensitively.
Metric parse_metric(std::string_view name);

struct Corpus {
  std::vector<UserPath> exposed;
  std::vector<UserPath> unexposed;
};

// Splits on the "arm" user feature ("exposed" / "unexposed"). Throws
// DataError for paths without a recognized arm.
Corpus split_by_arm(std::vector<UserPath> paths);

// Throw DataError for an empty group (and, for the per-exposed-conversion
// metrics, for zero exposed conversions).
double icpu(std::span<const UserPath> exposed, std::span<const UserPath> unexposed);
double icpt(std::span<const UserPath> exposed, std::span<const UserPath> unexposed);
double icpe(std::span<const UserPath> exposed, std::span<const UserPath> unexposed);
double icpe_prime(std::span<const UserPath> exposed,
                  std::span<const UserPath> unexposed);

struct PredictedMetrics {
  double picpu = 0.0;
  double picppe = 0.0;
};

// Conversions replaced by sum over segments of exp(eta) * length.
PredictedMetrics predicted_metrics(const IntensityModel& model,
                                   std::span<const UserPath> exposed,
                                   std::span<const UserPath> unexposed);

// Normalized ad credit summed over the exposed conversions, divided by
// their count. config.normalization is ignored.
double aicpe(const IntensityModel& model, std::span<const UserPath> exposed,
             AttributionConfig config = {});

// Per-user quantities every metric is built from.
struct UserStats {
  double conversions = 0.0;
  double observation_time = 0.0;
  double predicted = 0.0;  // needs a model
  double ad_credit = 0.0;  // normalized; needs a model or a credit file
};

struct GroupTotals {
  double users = 0.0;
  double conversions = 0.0;
  double observation_time = 0.0;
  double predicted = 0.0;
  double ad_credit = 0.0;

  void add(const UserStats& user);
};

struct CorpusStats {
  std::vector<UserStats> exposed;
  std::vector<UserStats> unexposed;
  bool has_predictions = false;
  bool has_credit = false;
};

// Predictions come from `model` when given; ad credit from `model` with the
// attribution config, unless `credit_by_user` is given.
CorpusStats corpus_stats(const Corpus& corpus, const IntensityModel* model,
                         const AttributionConfig& attribution = {},
                         const std::map<std::string, double>* credit_by_user = nullptr,
                         int workers = 1);

// Throws DataError for empty groups, zero denominators, or a metric whose
// inputs (predictions, credit) are missing.
double metric_value(Metric metric, const GroupTotals& exposed,
                    const GroupTotals& unexposed);

// A resample: indices into the exposed and unexposed groups.
struct BootstrapSample {
  std::span<const std::size_t> exposed;
  std::span<const std::size_t> unexposed;
};
using SampleMetric = std::function<double(const BootstrapSample&)>;

SampleMetric stats_metric(Metric metric, const CorpusStats& stats);

struct BootstrapConfig {
  std::size_t replicates = 200;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
  std::size_t replicates = 0;
};

// Resamples each group with replacement, within the group, and returns the
// 2.5 and 97.5 percentiles. Throws std::invalid_argument for fewer than two
// replicates.
Interval bootstrap_ci(const SampleMetric& metric, std::size_t exposed_users,
                      std::size_t unexposed_users, const BootstrapConfig& config);

// Leave-one-block-out: users are split into `blocks` contiguous blocks per
// group and `metric` is re-evaluated (possibly refitting) without each
// block. Normal interval from the jackknife variance.
Interval block_jackknife_ci(const SampleMetric& metric, std::size_t exposed_users,
                            std::size_t unexposed_users, std::size_t blocks);

struct MetricReport {
  Metric metric = Metric::kICPU;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t replicates = 0;
  std::optional<std::string> slice;  // "feature=level"
};

std::vector<MetricReport> metric_reports(std::span<const Metric> metrics,
                                         const CorpusStats& stats,
                                         const BootstrapConfig& config);

// One report per level of a user feature. Features derived from the path
// (event or conversion counts and the like) and names that are not user
// features are refused with DataError, since slicing on anything the
// treatment can change confounds the comparison.
std::vector<MetricReport> sliced_metrics(Metric metric, const Corpus& corpus,
                                         const CorpusStats& stats,
                                         const std::string& slice_feature,
                                         const BootstrapConfig& config);

std::string report_json(std::span<const MetricReport> reports);
std::string report_csv(std::span<const MetricReport> reports);

// Sums "mta-credit/1" records per user. Records must be normalized;
// degenerate records contribute zero.
std::map<std::string, double> load_credit_totals(std::istream& source);

}  // namespace mta

#endif  // MTA_EVALUATION_H_
