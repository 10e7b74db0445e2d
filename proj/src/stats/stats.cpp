#include "ssorl/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "ssorl/common/random.hpp"

namespace ssorl::stats {

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double std_error(std::span<const double> values) {
  return values.empty() ? 0.0 : stddev(values) / std::sqrt(static_cast<double>(values.size()));
}

double iqm(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("iqm: empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double lo = 0.25 * n, hi = 0.75 * n;
  // Order statistic i covers [i, i+1); weight is its overlap with [lo, hi).
  double total = 0.0;
  for (std::size_t i = static_cast<std::size_t>(lo); i < v.size() && static_cast<double>(i) < hi; ++i) {
    const double w = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
    if (w > 0.0) total += w * v[i];
  }
  return total / (hi - lo);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

Statistic Statistic::named(const std::string& name) {
  if (name == "mean") return {name, [](std::span<const double> v) { return mean(v); }};
  if (name == "iqm") return {name, [](std::span<const double> v) { return iqm(v); }};
  if (name == "median") {
    return {name, [](std::span<const double> v) {
              std::vector<double> s(v.begin(), v.end());
              std::sort(s.begin(), s.end());
              return quantile_sorted(s, 0.5);
            }};
  }
  throw std::invalid_argument("unknown statistic '" + name + "'");
}

Json CiReport::to_json() const {
  return Json{{"statistic", statistic}, {"point", point}, {"lower", lower}, {"upper", upper},
              {"level", level},         {"reps", reps},   {"seed", seed}};
}

CiReport CiReport::from_json(const Json& j) {
  CiReport r;
  r.statistic = j.at("statistic").get<std::string>();
  r.point = j.at("point").get<double>();
  r.lower = j.at("lower").get<double>();
  r.upper = j.at("upper").get<double>();
  r.level = j.at("level").get<double>();
  r.reps = j.at("reps").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

std::string CiReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %.4f [%.4f, %.4f] (%g%%, %zu reps, seed %llu)", statistic.c_str(), point, lower,
                upper, level * 100.0, reps, static_cast<unsigned long long>(seed));
  return buf;
}

CiReport stratified_bootstrap_ci(const ScoreMatrix& matrix, const Statistic& statistic, double level, std::size_t reps,
                                 std::uint64_t seed) {
  if (reps < 100) throw std::invalid_argument("stratified_bootstrap_ci: need at least 100 replications");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("stratified_bootstrap_ci: level must be in (0, 1)");
  const std::size_t n = matrix.n_instances();
  if (n < 2) throw std::invalid_argument("stratified_bootstrap_ci: need at least 2 instances per stratum");
  const std::size_t m = matrix.n_strata();

  CiReport r;
  r.statistic = statistic.name;
  r.level = level;
  r.reps = reps;
  r.seed = seed;
  const auto all = matrix.flat();
  r.point = statistic.fn(all);

  const CounterRng rng(seed, 0xb007);
  const std::size_t per_rep = m * n;
  std::vector<double> stats(reps);
  std::vector<double> pooled(per_rep);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    for (std::size_t s = 0; s < m; ++s) {
      const auto& row = matrix.row(s);
      for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t counter = static_cast<std::uint64_t>(rep) * per_rep + s * n + j;
        pooled[s * n + j] = row[rng.index_at(counter, n)];
      }
    }
    stats[rep] = statistic.fn(pooled);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  r.lower = quantile_sorted(stats, tail);
  r.upper = quantile_sorted(stats, 1.0 - tail);
  return r;
}

double relative_performance_gap(double perf_oracle, double perf_agent) {
  if (!(perf_oracle > 0.0)) throw std::domain_error("relative_performance_gap: oracle performance must be positive");
  return (perf_oracle - perf_agent) / perf_oracle;
}

std::vector<double> return_to_go(std::span<const double> rewards) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) g[i] = acc += rewards[i];
  return g;
}

}  // namespace ssorl::stats
