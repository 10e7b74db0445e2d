#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssorl/env/trajectory.hpp"

namespace ssorl::data {

using env::Dataset;
using env::Trajectory;

/// Labelled/unlabelled partition of a source dataset. Index vectors refer
/// to positions in the source and are sorted ascending.
struct SplitDataset {
  Dataset labelled;
  Dataset unlabelled;  // actions stripped
  std::vector<std::size_t> labelled_indices;
  std::vector<std::size_t> unlabelled_indices;
  Json provenance = Json::object();
};

/// Source positions sorted by (return, index).
std::vector<std::size_t> return_order(const Dataset& dataset);

/// Nearest-rank q-th percentile of the returns: R_(ceil(q N / 100)).
double return_percentile(const Dataset& dataset, double q);

/// Labelled trajectories drawn uniformly from those whose return is at most
/// the q-th percentile; every other trajectory becomes unlabelled.
/// Labelled count is round(label_frac * N).
SplitDataset coupled_split(const Dataset& dataset, double q, double label_frac, std::uint64_t seed);

enum class ReturnGroup { kLow, kMed, kHigh };

ReturnGroup parse_group(const std::string& name);
std::string group_name(ReturnGroup group);

/// Return terciles: the sorted order cut at round(N/3) and round(2N/3).
std::array<std::vector<std::size_t>, 3> return_terciles(const Dataset& dataset);

/// Labelled and unlabelled sets drawn from return terciles. When both come
/// from the same tercile they are drawn jointly, so they stay disjoint.
SplitDataset decoupled_split(const Dataset& dataset, ReturnGroup labelled_group, std::size_t n_labelled,
                             ReturnGroup unlabelled_group, std::size_t n_unlabelled, std::uint64_t seed);

/// Trajectories at `indices`, in that order.
Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices);

/// Same trajectories with actions removed.
Dataset strip_actions(const Dataset& dataset);

/// labelled + proxy, shuffled under `seed`. Throws if any trajectory lacks
/// actions or the headers disagree.
Dataset merge_with_proxy(const Dataset& labelled, const Dataset& proxy, std::uint64_t seed);

struct TrainValSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Random partition of [0, n) with round(val_frac * n) validation items.
/// Throws if that leaves either side empty.
TrainValSplit train_val_split(std::size_t n, double val_frac, std::uint64_t seed);

}  // namespace ssorl::data
