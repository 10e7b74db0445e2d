#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"
#include "ssorl/stats/score_matrix.hpp"

namespace ssorl::stats {

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1); 0 for a single value.
double stddev(std::span<const double> values);
/// Standard error of the mean.
double std_error(std::span<const double> values);

/// Interquartile mean: 25% trimmed from each end. When n is not a multiple
/// of 4 the boundary order statistics enter with fractional weight.
double iqm(std::span<const double> values);

/// Linear-interpolation quantile of already sorted values, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct Statistic {
  std::string name;
  std::function<double(std::span<const double>)> fn;

  static Statistic named(const std::string& name);  // "mean", "iqm", "median"
};

struct CiReport {
  std::string statistic;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t reps = 0;
  std::uint64_t seed = 0;

  double width() const { return upper - lower; }
  Json to_json() const;
  static CiReport from_json(const Json& j);
  /// e.g. "iqm 0.8120 [0.7710, 0.8460] (95%, 50000 reps, seed 0)"
  std::string summary() const;
};

/// Percentile bootstrap. Each replication resamples instances with
/// replacement inside every stratum, pools the draws and applies the
/// statistic. Draw j of replication r is a pure function of (seed, r, j).
CiReport stratified_bootstrap_ci(const ScoreMatrix& matrix, const Statistic& statistic, double level = 0.95,
                                 std::size_t reps = 50000, std::uint64_t seed = 0);

/// (oracle - agent) / oracle. Throws std::domain_error when oracle <= 0.
double relative_performance_gap(double perf_oracle, double perf_agent);

/// Suffix sums: g[t] = r[t] + g[t + 1].
std::vector<double> return_to_go(std::span<const double> rewards);

}  // namespace ssorl::stats
