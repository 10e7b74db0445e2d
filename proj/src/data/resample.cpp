#include "ssorl/data/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssorl/common/random.hpp"

namespace ssorl::data {

std::vector<std::size_t> return_bins(const std::vector<double>& returns, std::size_t n_bins, double r_min,
                                     double r_max) {
  if (n_bins == 0) throw std::invalid_argument("return_bins: n_bins must be positive");
  std::vector<std::size_t> out(returns.size(), 0);
  if (!(r_max > r_min)) return out;
  const double width = (r_max - r_min) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const double pos = std::floor((returns[i] - r_min) / width);
    out[i] = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(n_bins - 1)));
  }
  return out;
}

std::vector<std::size_t> return_bins(const env::Dataset& dataset, std::size_t n_bins) {
  const auto returns = dataset.returns();
  if (returns.empty()) return {};
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  return return_bins(returns, n_bins, *lo, *hi);
}

std::vector<double> bin_sampling_mass(const std::vector<std::size_t>& bin_of, std::size_t n_bins,
                                      BinWeighting weighting) {
  std::vector<double> count(n_bins, 0.0);
  for (std::size_t b : bin_of) count.at(b) += 1.0;
  std::vector<double> mass(n_bins, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0.0) continue;  // empty bins are skipped
    total += mass[b] = weighting == BinWeighting::kUniformBins ? 1.0 : 1.0 / count[b];
  }
  for (double& m : mass) m /= total;
  return mass;
}

env::Dataset resample_balanced(const env::Dataset& dataset, std::size_t n_bins, std::size_t n_out, std::uint64_t seed,
                               BinWeighting weighting) {
  if (dataset.empty()) throw std::invalid_argument("resample_balanced: empty dataset");
  const auto bin_of = return_bins(dataset, n_bins);
  std::vector<std::vector<std::size_t>> members(n_bins);
  for (std::size_t i = 0; i < bin_of.size(); ++i) members[bin_of[i]].push_back(i);
  const auto mass = bin_sampling_mass(bin_of, n_bins, weighting);
  std::vector<double> cumulative(n_bins);
  double acc = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) cumulative[b] = acc += mass[b];

  Rng rng(derive_seed(seed, 0xba1));
  env::Dataset out = dataset.empty_like();
  out.trajectories.reserve(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double u = rng.uniform() * acc;
    std::size_t b = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    b = std::min(b, n_bins - 1);
    while (members[b].empty()) --b;  // only reachable through rounding at the top
    out.trajectories.push_back(dataset.trajectories[members[b][rng.index(members[b].size())]]);
  }
  out.provenance["resample"] = {{"n_bins", n_bins},
                                {"n_out", n_out},
                                {"seed", seed},
                                {"weighting", weighting == BinWeighting::kUniformBins ? "uniform_bins" : "inverse_count"}};
  return out;
}

double bin_entropy(const std::vector<std::size_t>& bin_of, std::size_t n_bins) {
  if (bin_of.empty()) return 0.0;
  std::vector<double> count(n_bins, 0.0);
  for (std::size_t b : bin_of) count.at(b) += 1.0;
  double h = 0.0;
  const double n = static_cast<double>(bin_of.size());
  for (double c : count) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

}  // namespace ssorl::data
