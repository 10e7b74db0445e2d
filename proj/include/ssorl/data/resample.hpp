#pragma once

#include <cstdint>
#include <vector>

#include "ssorl/env/trajectory.hpp"

namespace ssorl::data {

enum class BinWeighting {
  kUniformBins,   // each non-empty bin equally likely (trajectory weight 1/n_i)
  kInverseCount,  // bin weight 1/n_i, then uniform within the bin
};

/// Bin of each trajectory: n_bins bins linearly spaced on [R_min, R_max],
/// the maximum return falling in the last bin. All returns equal gives bin 0.
std::vector<std::size_t> return_bins(const env::Dataset& dataset, std::size_t n_bins);
/// Same binning against an explicit range; values outside are clamped.
std::vector<std::size_t> return_bins(const std::vector<double>& returns, std::size_t n_bins, double r_min, double r_max);

/// Probability of drawing each bin under `weighting`.
std::vector<double> bin_sampling_mass(const std::vector<std::size_t>& bin_of, std::size_t n_bins,
                                      BinWeighting weighting);

/// n_out trajectories drawn with replacement: a bin first, then a uniform
/// member of that bin.
env::Dataset resample_balanced(const env::Dataset& dataset, std::size_t n_bins, std::size_t n_out, std::uint64_t seed,
                               BinWeighting weighting = BinWeighting::kUniformBins);

/// Shannon entropy (nats) of bin occupancy.
double bin_entropy(const std::vector<std::size_t>& bin_of, std::size_t n_bins);

}  // namespace ssorl::data
