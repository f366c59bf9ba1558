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

#include "mta/evaluation.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json_util.h"
#include "mta/error.h"
#include "mta/estimation.h"
#include "mta/simulator.h"
#include "parallel.h"

namespace mta {
namespace {

using internal::Json;

constexpr std::uint64_t kBootstrapStream = 0xb0075742a9ULL;

// Names that describe what happened on the path rather than who the user is.
const std::set<std::string> kPathDerived{
    "num_queries", "num_ads",     "num_events",  "num_conversions", "queries",
    "ads",         "events",      "conversions", "event_count",     "query_count",
    "ad_count",    "conversion_count", "path_length"};

UserStats base_stats(const UserPath& path) {
  UserStats s;
  s.conversions = static_cast<double>(conversion_count(path));
  s.observation_time = path.window.length();
  return s;
}

double predicted_conversions(const IntensityModel& model, const UserPath& path) {
  double total = 0.0;
  for (const Segment& s : segment_path(model.spec, path)) {
    total += std::exp(model.eta(s.active)) * s.exposure();
  }
  return total;
}

double normalized_ad_credit(const IntensityModel& model, const UserPath& path,
                            AttributionConfig config) {
  config.normalization = Normalization::kNormalized;
  double total = 0.0;
  const std::size_t conversions = conversion_count(path);
  for (std::size_t c = 0; c < conversions; ++c) {
    total += attribute(model, path, c, config).total_ad_credit();
  }
  return total;
}

GroupTotals totals_of(std::span<const UserPath> paths) {
  GroupTotals t;
  for (const UserPath& p : paths) t.add(base_stats(p));
  return t;
}

GroupTotals totals_of(std::span<const UserStats> users,
                      std::span<const std::size_t> sample) {
  GroupTotals t;
  for (std::size_t i : sample) t.add(users[i]);
  return t;
}

double metric_on_paths(Metric metric, std::span<const UserPath> exposed,
                       std::span<const UserPath> unexposed) {
  return metric_value(metric, totals_of(exposed), totals_of(unexposed));
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

Json report_entry(const MetricReport& r) {
  Json entry{{"metric", to_string(r.metric)},
             {"point", r.point},
             {"ci_low", r.ci_low},
             {"ci_high", r.ci_high},
             {"replicates", r.replicates}};
  if (r.slice) entry["slice"] = *r.slice;
  return entry;
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kICPU:
      return "ICPU";
    case Metric::kICPT:
      return "ICPT";
    case Metric::kICPE:
      return "ICPE";
    case Metric::kICPEPrime:
      return "ICPE_prime";
    case Metric::kPICPU:
      return "PICPU";
    case Metric::kPICPPE:
      return "PICPPE";
    case Metric::kAICPE:
      return "AICPE";
  }
  return "ICPU";
}

Metric parse_metric(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Metric m : {Metric::kICPU, Metric::kICPT, Metric::kICPE, Metric::kICPEPrime,
                   Metric::kPICPU, Metric::kPICPPE, Metric::kAICPE}) {
    std::string candidate(to_string(m));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (candidate == upper) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

Corpus split_by_arm(std::vector<UserPath> paths) {
  Corpus corpus;
  for (UserPath& p : paths) {
    auto it = p.user_features.find(std::string(kArmFeature));
    if (it == p.user_features.end()) {
      throw DataError("user " + p.user_id + " has no arm feature");
    }
    if (it->second == "exposed") {
      corpus.exposed.push_back(std::move(p));
    } else if (it->second == "unexposed") {
      corpus.unexposed.push_back(std::move(p));
    } else {
      throw DataError("user " + p.user_id + " has unknown arm '" + it->second + "'");
    }
  }
  return corpus;
}

void GroupTotals::add(const UserStats& user) {
  users += 1.0;
  conversions += user.conversions;
  observation_time += user.observation_time;
  predicted += user.predicted;
  ad_credit += user.ad_credit;
}

double metric_value(Metric metric, const GroupTotals& e, const GroupTotals& u) {
  if (e.users == 0.0) throw DataError("exposed group is empty");
  const bool needs_unexposed = metric != Metric::kAICPE;
  if (needs_unexposed && u.users == 0.0) throw DataError("unexposed group is empty");
  auto per_exposed_conversion = [&](double value) {
    if (e.conversions == 0.0) throw DataError("exposed group has no conversions");
    return value;
  };
  switch (metric) {
    case Metric::kICPU:
      return e.conversions / e.users - u.conversions / u.users;
    case Metric::kICPT:
      if (e.observation_time <= 0.0 || u.observation_time <= 0.0) {
        throw DataError("zero observation time");
      }
      return e.conversions / e.observation_time - u.conversions / u.observation_time;
    case Metric::kICPE:
      per_exposed_conversion(0.0);
      return (e.conversions / e.users - u.conversions / u.users) * e.users / e.conversions;
    case Metric::kICPEPrime:
      per_exposed_conversion(0.0);
      if (e.observation_time <= 0.0 || u.observation_time <= 0.0) {
        throw DataError("zero observation time");
      }
      return (e.conversions / e.observation_time - u.conversions / u.observation_time) *
             e.observation_time / e.conversions;
    case Metric::kPICPU:
      return e.predicted / e.users - u.predicted / u.users;
    case Metric::kPICPPE:
      if (e.predicted <= 0.0) throw DataError("exposed group has no predicted conversions");
      return (e.predicted / e.users - u.predicted / u.users) * e.users / e.predicted;
    case Metric::kAICPE:
      return per_exposed_conversion(e.ad_credit / e.conversions);
  }
  return 0.0;
}

double icpu(std::span<const UserPath> exposed, std::span<const UserPath> unexposed) {
  return metric_on_paths(Metric::kICPU, exposed, unexposed);
}

double icpt(std::span<const UserPath> exposed, std::span<const UserPath> unexposed) {
  return metric_on_paths(Metric::kICPT, exposed, unexposed);
}

double icpe(std::span<const UserPath> exposed, std::span<const UserPath> unexposed) {
  return metric_on_paths(Metric::kICPE, exposed, unexposed);
}

double icpe_prime(std::span<const UserPath> exposed,
                  std::span<const UserPath> unexposed) {
  return metric_on_paths(Metric::kICPEPrime, exposed, unexposed);
}

PredictedMetrics predicted_metrics(const IntensityModel& model,
                                   std::span<const UserPath> exposed,
                                   std::span<const UserPath> unexposed) {
  GroupTotals e;
  GroupTotals u;
  for (const UserPath& p : exposed) {
    UserStats s = base_stats(p);
    s.predicted = predicted_conversions(model, p);
    e.add(s);
  }
  for (const UserPath& p : unexposed) {
    UserStats s = base_stats(p);
    s.predicted = predicted_conversions(model, p);
    u.add(s);
  }
  return {metric_value(Metric::kPICPU, e, u), metric_value(Metric::kPICPPE, e, u)};
}

double aicpe(const IntensityModel& model, std::span<const UserPath> exposed,
             AttributionConfig config) {
  GroupTotals e;
  for (const UserPath& p : exposed) {
    UserStats s = base_stats(p);
    s.ad_credit = normalized_ad_credit(model, p, config);
    e.add(s);
  }
  return metric_value(Metric::kAICPE, e, GroupTotals{});
}

CorpusStats corpus_stats(const Corpus& corpus, const IntensityModel* model,
                         const AttributionConfig& attribution,
                         const std::map<std::string, double>* credit_by_user,
                         int workers) {
  CorpusStats stats;
  stats.has_predictions = model != nullptr;
  stats.has_credit = model != nullptr || credit_by_user != nullptr;
  auto fill = [&](const std::vector<UserPath>& paths, std::vector<UserStats>& out,
                  bool exposed) {
    out.resize(paths.size());
    internal::parallel_for(paths.size(), workers, [&](std::size_t i) {
      const UserPath& p = paths[i];
      UserStats s = base_stats(p);
      if (model != nullptr) s.predicted = predicted_conversions(*model, p);
      if (exposed && credit_by_user != nullptr) {
        auto it = credit_by_user->find(p.user_id);
        if (it != credit_by_user->end()) {
          s.ad_credit = it->second;
        } else if (s.conversions > 0.0) {
          throw DataError("no credit records for user " + p.user_id);
        }
      } else if (exposed && model != nullptr) {
        s.ad_credit = normalized_ad_credit(*model, p, attribution);
      }
      out[i] = s;
    });
  };
  fill(corpus.exposed, stats.exposed, true);
  fill(corpus.unexposed, stats.unexposed, false);
  return stats;
}

SampleMetric stats_metric(Metric metric, const CorpusStats& stats) {
  const bool predicted = metric == Metric::kPICPU || metric == Metric::kPICPPE;
  if (predicted && !stats.has_predictions) {
    throw DataError(std::string(to_string(metric)) + " needs a model");
  }
  if (metric == Metric::kAICPE && !stats.has_credit) {
    throw DataError("AICPE needs a model or credit records");
  }
  return [metric, &stats](const BootstrapSample& sample) {
    return metric_value(metric, totals_of(stats.exposed, sample.exposed),
                        totals_of(stats.unexposed, sample.unexposed));
  };
}

Interval bootstrap_ci(const SampleMetric& metric, std::size_t exposed_users,
                      std::size_t unexposed_users, const BootstrapConfig& config) {
  if (config.replicates < 2) {
    throw std::invalid_argument("bootstrap needs at least two replicates");
  }
  std::vector<double> values(config.replicates);
  internal::parallel_for(config.replicates, config.workers, [&](std::size_t r) {
    Rng rng = rng_stream(config.seed, kBootstrapStream, r);
    auto draw = [&rng](std::size_t n) {
      std::vector<std::size_t> idx(n);
      if (n == 0) return idx;
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t& i : idx) i = pick(rng);
      return idx;
    };
    const std::vector<std::size_t> e = draw(exposed_users);
    const std::vector<std::size_t> u = draw(unexposed_users);
    values[r] = metric({e, u});
  });
  Interval out;
  out.replicates = config.replicates;
  out.low = quantile_type7(values, 0.025);
  out.high = quantile_type7(std::move(values), 0.975);
  return out;
}

Interval block_jackknife_ci(const SampleMetric& metric, std::size_t exposed_users,
                            std::size_t unexposed_users, std::size_t blocks) {
  if (blocks < 2) throw std::invalid_argument("jackknife needs at least two blocks");
  auto keep = [blocks](std::size_t n, std::size_t drop) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (i * blocks / std::max<std::size_t>(n, 1) != drop) idx.push_back(i);
    }
    return idx;
  };
  const std::vector<std::size_t> all_e = iota(exposed_users);
  const std::vector<std::size_t> all_u = iota(unexposed_users);
  const double point = metric({all_e, all_u});
  std::vector<double> values;
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto e = keep(exposed_users, b);
    const auto u = keep(unexposed_users, b);
    values.push_back(metric({e, u}));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(blocks);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
  return {point - 1.959963984540054 * se, point + 1.959963984540054 * se, blocks};
}

std::vector<MetricReport> metric_reports(std::span<const Metric> metrics,
                                         const CorpusStats& stats,
                                         const BootstrapConfig& config) {
  const std::vector<std::size_t> all_e = iota(stats.exposed.size());
  const std::vector<std::size_t> all_u = iota(stats.unexposed.size());
  std::vector<MetricReport> out;
  for (Metric m : metrics) {
    const SampleMetric f = stats_metric(m, stats);
    MetricReport r;
    r.metric = m;
    r.point = f({all_e, all_u});
    r.ci_low = r.ci_high = r.point;
    if (config.replicates >= 2) {
      const Interval ci = bootstrap_ci(f, all_e.size(), all_u.size(), config);
      // A percentile interval need not cover the point estimate.
      r.ci_low = std::min(ci.low, r.point);
      r.ci_high = std::max(ci.high, r.point);
      r.replicates = ci.replicates;
    }
    out.push_back(r);
  }
  return out;
}

std::vector<MetricReport> sliced_metrics(Metric metric, const Corpus& corpus,
                                         const CorpusStats& stats,
                                         const std::string& slice_feature,
                                         const BootstrapConfig& config) {
  if (kPathDerived.contains(slice_feature)) {
    throw DataError("refusing to slice on '" + slice_feature +
                    "': it is derived from the path, which exposure can change, so "
                    "the groups would no longer be comparable");
  }
  if (slice_feature == kArmFeature) {
    throw DataError("refusing to slice on the experiment arm itself");
  }
  std::set<std::string> levels;
  auto collect = [&](const std::vector<UserPath>& paths) {
    for (const UserPath& p : paths) {
      auto it = p.user_features.find(slice_feature);
      if (it != p.user_features.end()) levels.insert(it->second);
    }
  };
  collect(corpus.exposed);
  collect(corpus.unexposed);
  if (levels.empty()) {
    throw DataError("'" + slice_feature +
                    "' is not a user feature of this corpus; only user features "
                    "fixed before the experiment can be sliced on");
  }
  std::vector<MetricReport> out;
  for (const std::string& level : levels) {
    CorpusStats subset;
    subset.has_predictions = stats.has_predictions;
    subset.has_credit = stats.has_credit;
    auto pick = [&](const std::vector<UserPath>& paths, const std::vector<UserStats>& from,
                    std::vector<UserStats>& to) {
      for (std::size_t i = 0; i < paths.size(); ++i) {
        auto it = paths[i].user_features.find(slice_feature);
        if (it != paths[i].user_features.end() && it->second == level) to.push_back(from[i]);
      }
    };
    pick(corpus.exposed, stats.exposed, subset.exposed);
    pick(corpus.unexposed, stats.unexposed, subset.unexposed);
    const Metric one[] = {metric};
    MetricReport r = metric_reports(one, subset, config).front();
    r.slice = slice_feature + "=" + level;
    out.push_back(r);
  }
  return out;
}

std::string report_json(std::span<const MetricReport> reports) {
  Json metrics = Json::array();
  for (const MetricReport& r : reports) metrics.push_back(report_entry(r));
  return Json{{"schema", kReportSchema}, {"metrics", metrics}}.dump(2);
}

std::string report_csv(std::span<const MetricReport> reports) {
  std::ostringstream out;
  out.precision(17);
  out << "metric,point,ci_low,ci_high,slice\n";
  for (const MetricReport& r : reports) {
    out << to_string(r.metric) << ',' << r.point << ',' << r.ci_low << ',' << r.ci_high
        << ',' << r.slice.value_or("") << '\n';
  }
  return out.str();
}

std::map<std::string, double> load_credit_totals(std::istream& source) {
  std::map<std::string, double> totals;
  std::string line;
  std::size_t number = 0;
  while (std::getline(source, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string context = "credit line " + std::to_string(number);
    const Json record = internal::parse_json(line, context);
    internal::check_schema(record, kCreditSchema);
    const std::string user = internal::require_string(record, "user_id", context);
    const std::string normalization =
        internal::require_string(record, "normalization", context);
    if (normalization != to_string(Normalization::kNormalized)) {
      throw DataError(context + ": evaluation needs normalized credit, got '" +
                      normalization + "'");
    }
    double& total = totals[user];
    if (record.value("degenerate", false)) continue;
    const Json& credits = internal::require(record, "credits", context);
    if (!credits.is_array()) throw DataError(context + ": credits must be an array");
    for (const Json& c : credits) total += internal::require_number(c, "credit", context);
  }
  return totals;
}

}  // namespace mta
