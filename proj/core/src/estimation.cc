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

#include "mta/estimation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "json_util.h"
#include "mta/error.h"
#include "parallel.h"

namespace mta {
namespace {

using internal::Json;

// Paths per accumulation block. Fixed so that summation order, and hence
// the fitted bits, do not depend on the worker count.
constexpr std::size_t kBlockSize = 2048;

struct RowLess {
  bool operator()(const DesignRow& a, const DesignRow& b) const {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [](const ActiveKey& x, const ActiveKey& y) {
          if (x.key != y.key) return x.key < y.key;
          return x.weight < y.weight;
        });
  }
};

struct Cell {
  double exposure = 0.0;
  double conversions = 0.0;
  double log_exposure_term = 0.0;  // sum of conversions * log(exposure)
};

using CellMap = std::map<DesignRow, Cell, RowLess>;

void accumulate(CellMap& cells, const Segment& segment) {
  Cell& cell = cells[segment.active];
  const double exposure = segment.exposure();
  cell.exposure += exposure;
  cell.conversions += static_cast<double>(segment.conversions);
  if (segment.conversions > 0) {
    cell.log_exposure_term += static_cast<double>(segment.conversions) * std::log(exposure);
  }
}

// Sufficient statistics of the Poisson regression: segments with identical
// design rows collapse into one group.
struct Problem {
  std::vector<CoefficientKey> keys;
  std::size_t intercept = 0;
  struct Group {
    std::vector<std::pair<int, double>> row;
    double exposure = 0.0;
    double conversions = 0.0;
  };
  std::vector<Group> groups;
  double constant = 0.0;
  double total_conversions = 0.0;
  double total_exposure = 0.0;
  std::map<CoefficientKey, double> offsets;
};

Problem build_problem(const ModelSpec& spec, std::span<const UserPath> paths,
                      int workers) {
  const std::size_t blocks = (paths.size() + kBlockSize - 1) / kBlockSize;
  std::vector<CellMap> partial(blocks);
  internal::parallel_for(blocks, workers, [&](std::size_t b) {
    const std::size_t end = std::min(paths.size(), (b + 1) * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      for (const Segment& s : segment_path(spec, paths[i])) accumulate(partial[b], s);
    }
  });
  CellMap cells;
  for (CellMap& block : partial) {
    for (auto& [row, cell] : block) {
      Cell& total = cells[row];
      total.exposure += cell.exposure;
      total.conversions += cell.conversions;
      total.log_exposure_term += cell.log_exposure_term;
    }
  }

  Problem problem;
  std::map<CoefficientKey, int> index;
  for (const auto& [row, cell] : cells) {
    for (const ActiveKey& entry : row) {
      index.emplace(entry.key, 0);
      problem.offsets[entry.key] += cell.exposure;
    }
  }
  int next = 0;
  for (auto& [key, i] : index) {
    i = next++;
    problem.keys.push_back(key);
  }
  problem.intercept = static_cast<std::size_t>(index.at(CoefficientKey::intercept()));
  for (const auto& [row, cell] : cells) {
    Problem::Group group;
    for (const ActiveKey& entry : row) group.row.emplace_back(index.at(entry.key), entry.weight);
    group.exposure = cell.exposure;
    group.conversions = cell.conversions;
    problem.constant += cell.log_exposure_term;
    problem.total_conversions += cell.conversions;
    problem.total_exposure += cell.exposure;
    problem.groups.push_back(std::move(group));
  }
  return problem;
}

class Objective {
 public:
  Objective(const Problem& problem, double ridge) : problem_(problem), ridge_(ridge) {}

  // Unpenalized log-likelihood including the log-exposure constant.
  double log_likelihood(const Eigen::VectorXd& beta) const {
    return problem_.constant + kernel(beta);
  }

  double penalty(const Eigen::VectorXd& beta) const {
    double total = 0.0;
    for (Eigen::Index k = 0; k < beta.size(); ++k) {
      if (static_cast<std::size_t>(k) != problem_.intercept) total += beta[k] * beta[k];
    }
    return ridge_ * total;
  }

  // The optimized objective. The constant is left out so that comparisons
  // between iterates keep full precision.
  double value(const Eigen::VectorXd& beta) const {
    return kernel(beta) - penalty(beta);
  }

  void derivatives(const Eigen::VectorXd& beta, Eigen::VectorXd& gradient,
                   Eigen::MatrixXd& information) const {
    const Eigen::Index p = beta.size();
    gradient.setZero(p);
    information.setZero(p, p);
    for (const auto& g : problem_.groups) {
      const double mu = g.exposure * std::exp(linear(g, beta));
      const double residual = g.conversions - mu;
      for (const auto& [i, wi] : g.row) {
        gradient[i] += residual * wi;
        for (const auto& [j, wj] : g.row) information(i, j) += mu * wi * wj;
      }
    }
    for (Eigen::Index k = 0; k < p; ++k) {
      if (static_cast<std::size_t>(k) == problem_.intercept) continue;
      gradient[k] -= 2.0 * ridge_ * beta[k];
      information(k, k) += 2.0 * ridge_;
    }
  }

 private:
  double kernel(const Eigen::VectorXd& beta) const {
    double total = 0.0;
    for (const auto& g : problem_.groups) {
      const double eta = linear(g, beta);
      total += g.conversions * eta - g.exposure * std::exp(eta);
    }
    return total;
  }

  static double linear(const Problem::Group& g, const Eigen::VectorXd& beta) {
    double eta = 0.0;
    for (const auto& [i, w] : g.row) eta += w * beta[i];
    return eta;
  }

  const Problem& problem_;
  double ridge_;
};

// Gradient with the floor treated as a bound: a coefficient at the floor
// that still wants to decrease is stationary.
double projected_max_norm(const Eigen::VectorXd& gradient,
                          const Eigen::VectorXd& beta) {
  double norm = 0.0;
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    if (beta[k] <= kCoefficientFloor && gradient[k] < 0.0) continue;
    norm = std::max(norm, std::abs(gradient[k]));
  }
  return norm;
}

Eigen::VectorXd newton_direction(const Eigen::MatrixXd& information,
                                 const Eigen::VectorXd& gradient) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
  Eigen::VectorXd direction;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    direction = ldlt.solve(gradient);
    if (direction.allFinite()) return direction;
  }
  // Collinear keys: regularize just enough to make the system solvable.
  const double scale = information.diagonal().cwiseAbs().maxCoeff() + 1.0;
  Eigen::MatrixXd damped = information;
  damped.diagonal().array() += 1e-10 * scale;
  return Eigen::LDLT<Eigen::MatrixXd>(damped).solve(gradient);
}

void clamp(Eigen::VectorXd& beta) {
  beta = beta.cwiseMax(kCoefficientFloor);
}

Json key_json(const CoefficientKey& key) {
  return Json{{"label", key.label()}};
}

}  // namespace

void FitConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0)) {
    throw std::invalid_argument("gradient_tolerance must be positive");
  }
  if (!(ridge_penalty >= 0.0)) throw std::invalid_argument("ridge_penalty must be >= 0");
  if (step_control == StepControl::kGradientDescent && !(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
}

double log_likelihood(const IntensityModel& model,
                      std::span<const Segment> segments) {
  double total = 0.0;
  for (const Segment& s : segments) {
    double eta = 0.0;
    for (const ActiveKey& entry : s.active) {
      auto it = model.coefficients.find(entry.key);
      if (it == model.coefficients.end()) {
        throw ModelError("segment key " + entry.key.label() + " is not in the model");
      }
      eta += entry.weight * it->second;
    }
    const double exposure = s.exposure();
    total -= std::exp(eta) * exposure;
    if (s.conversions > 0) {
      total += static_cast<double>(s.conversions) * (eta + std::log(exposure));
    }
  }
  return total;
}

std::map<CoefficientKey, double> log_likelihood_gradient(
    const IntensityModel& model, std::span<const Segment> segments) {
  std::map<CoefficientKey, double> gradient;
  for (const auto& [key, value] : model.coefficients) gradient[key] = 0.0;
  for (const Segment& s : segments) {
    const double mu = std::exp(model.eta(s.active)) * s.exposure();
    const double residual = static_cast<double>(s.conversions) - mu;
    for (const ActiveKey& entry : s.active) {
      auto it = gradient.find(entry.key);
      if (it == gradient.end()) {
        throw ModelError("segment key " + entry.key.label() + " is not in the model");
      }
      it->second += residual * entry.weight;
    }
  }
  return gradient;
}

FitResult fit(const ModelSpec& spec, std::span<const UserPath> paths,
              const FitConfig& config) {
  config.validate();
  spec.validate();
  if (!spec.is_piecewise_constant()) {
    throw DataError("fitting requires a piecewise-constant (step) basis");
  }
  const Problem problem = build_problem(spec, paths, config.workers);
  if (!(problem.total_conversions > 0.0)) {
    throw DataError("corpus has no conversions; the intercept is not estimable");
  }

  FitResult result;
  result.per_key_offset = problem.offsets;
  for (const CoefficientKey& key : term_keys(spec)) {
    if (!problem.offsets.contains(key)) result.dropped_keys.push_back(key);
  }
  if (!result.dropped_keys.empty()) {
    result.warnings.push_back(std::to_string(result.dropped_keys.size()) +
                              " key(s) have zero offset and were not fitted");
  }

  const Eigen::Index p = static_cast<Eigen::Index>(problem.keys.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta[static_cast<Eigen::Index>(problem.intercept)] =
      std::log(problem.total_conversions / problem.total_exposure);
  // Without a penalty a key that never sees a conversion has its optimum at
  // minus infinity; start it on the floor so the gradient test cannot stop
  // it halfway down.
  if (config.ridge_penalty == 0.0) {
    std::vector<double> seen(problem.keys.size(), 0.0);
    for (const Problem::Group& g : problem.groups) {
      for (const auto& [k, w] : g.row) seen[static_cast<std::size_t>(k)] += g.conversions;
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (k != problem.intercept && seen[k] == 0.0) {
        beta[static_cast<Eigen::Index>(k)] = kCoefficientFloor;
      }
    }
  }

  const Objective objective(problem, config.ridge_penalty);
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;
  double current = objective.value(beta);
  result.likelihood_trace.push_back(objective.log_likelihood(beta));

  bool stalled = false;
  for (;;) {
    objective.derivatives(beta, gradient, information);
    result.gradient_max_norm = projected_max_norm(gradient, beta);
    if (result.gradient_max_norm <= config.gradient_tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= config.max_iterations) break;

    const Eigen::VectorXd direction =
        config.step_control == StepControl::kNewtonWithHalving
            ? newton_direction(information, gradient)
            : Eigen::VectorXd(config.learning_rate * gradient);
    // Near the optimum the objective change drops below its rounding error;
    // there a step is judged by the gradient instead.
    const double resolution = 1e-12 * (1.0 + std::abs(current));
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_gradient;
    Eigen::MatrixXd candidate_information;
    bool accepted = false;
    double step = 1.0;
    for (int halving = 0; halving < 60 && !accepted; ++halving, step *= 0.5) {
      candidate = beta + step * direction;
      clamp(candidate);
      if (candidate == beta) break;
      const double value = objective.value(candidate);
      if (!std::isfinite(value)) continue;
      if (value > current + resolution) {
        accepted = true;
      } else if (value >= current - resolution) {
        objective.derivatives(candidate, candidate_gradient, candidate_information);
        accepted = projected_max_norm(candidate_gradient, candidate) <
                   result.gradient_max_norm;
      }
      if (accepted) current = value;
    }
    ++result.iterations;
    if (!accepted) {
      stalled = true;
      break;
    }
    beta = candidate;
    result.likelihood_trace.push_back(objective.log_likelihood(beta));
  }

  result.model.spec = spec;
  for (Eigen::Index k = 0; k < p; ++k) {
    const CoefficientKey& key = problem.keys[static_cast<std::size_t>(k)];
    result.model.coefficients.emplace(key, beta[k]);
    if (beta[k] <= kCoefficientFloor) result.floored_keys.push_back(key);
  }
  for (const CoefficientKey& key : result.floored_keys) {
    result.warnings.push_back("separation: " + key.label() +
                              " is active only where nothing converts; held at " +
                              std::to_string(kCoefficientFloor));
  }
  if (!result.converged) {
    result.warnings.push_back(
        stalled ? "line search stalled before the gradient tolerance was met"
                : "did not converge within " + std::to_string(config.max_iterations) +
                      " iterations; returning the best iterate");
  }
  result.final_log_likelihood = objective.log_likelihood(beta);
  return result;
}

FitDiagnostics fit_diagnostics(const IntensityModel& model,
                               std::span<const Segment> segments) {
  FitDiagnostics d;
  d.log_likelihood = log_likelihood(model, segments);
  d.segments = segments.size();
  double deviance = 0.0;
  for (const Segment& s : segments) {
    const double mu = std::exp(model.eta(s.active)) * s.exposure();
    const double observed = static_cast<double>(s.conversions);
    d.predicted_conversions += mu;
    d.observed_conversions += observed;
    double unit = -(observed - mu);
    if (observed > 0.0) unit += observed * std::log(observed / mu);
    deviance += 2.0 * unit;
  }
  if (!segments.empty()) d.poisson_loss = deviance / static_cast<double>(segments.size());
  if (d.observed_conversions > 0.0) {
    d.prediction_bias = d.predicted_conversions / d.observed_conversions - 1.0;
  }
  return d;
}

std::map<std::string, FitDiagnostics> sliced_fit_diagnostics(
    const IntensityModel& model, std::span<const UserPath> paths,
    const std::string& user_feature) {
  std::map<std::string, std::vector<Segment>> slices;
  for (const UserPath& path : paths) {
    auto it = path.user_features.find(user_feature);
    const std::string level = it == path.user_features.end() ? "(missing)" : it->second;
    auto segments = segment_path(model.spec, path);
    auto& bucket = slices[level];
    bucket.insert(bucket.end(), std::make_move_iterator(segments.begin()),
                  std::make_move_iterator(segments.end()));
  }
  std::map<std::string, FitDiagnostics> out;
  for (const auto& [level, segments] : slices) {
    out.emplace(level, fit_diagnostics(model, segments));
  }
  return out;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::map<CoefficientKey, ReplicateStat> replicate_summary(
    std::span<const IntensityModel> estimates) {
  if (estimates.size() < 2) {
    throw std::invalid_argument("replicate_summary needs at least two replicates");
  }
  for (const IntensityModel& m : estimates) {
    if (!(m.spec == estimates.front().spec)) {
      throw ModelError("replicate_summary: spec mismatch across replicates");
    }
  }
  std::map<CoefficientKey, std::vector<double>> values;
  for (const IntensityModel& m : estimates) {
    for (const auto& [key, value] : m.coefficients) values[key].push_back(std::exp(value));
  }
  std::map<CoefficientKey, ReplicateStat> out;
  for (auto& [key, sample] : values) {
    ReplicateStat stat;
    stat.replicates = sample.size();
    double sum = 0.0;
    for (double v : sample) sum += v;
    stat.mean = sum / static_cast<double>(sample.size());
    stat.q025 = quantile_type7(sample, 0.025);
    stat.q975 = quantile_type7(std::move(sample), 0.975);
    out.emplace(key, stat);
  }
  return out;
}

std::string fit_report_json(const FitResult& result) {
  Json offsets = Json::array();
  for (const auto& [key, offset] : result.per_key_offset) {
    Json entry = key_json(key);
    entry["offset_days"] = offset;
    offsets.push_back(std::move(entry));
  }
  Json dropped = Json::array();
  for (const auto& key : result.dropped_keys) dropped.push_back(key.label());
  Json floored = Json::array();
  for (const auto& key : result.floored_keys) floored.push_back(key.label());
  Json report{{"schema", kFitReportSchema},
              {"converged", result.converged},
              {"iterations", result.iterations},
              {"final_log_likelihood", result.final_log_likelihood},
              {"gradient_max_norm", result.gradient_max_norm},
              {"likelihood_trace", result.likelihood_trace},
              {"per_key_offset", offsets},
              {"dropped_keys", dropped},
              {"floored_keys", floored},
              {"warnings", result.warnings}};
  return report.dump(2);
}

}  // namespace mta
