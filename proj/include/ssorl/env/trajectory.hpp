#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"
#include "ssorl/nn/tensor.hpp"

namespace ssorl::env {

struct TrajectoryMeta {
  std::int64_t policy_id = -1;     // index of the generating behavior policy
  std::uint64_t seed = 0;          // rollout seed
  double total_return = 0.0;       // sum of rewards, in order
  std::uint64_t source_index = 0;  // position in the source dataset

  friend bool operator==(const TrajectoryMeta&, const TrajectoryMeta&) = default;
};

/// One episode. states has |tau|+1 rows (terminal state included), actions
/// |tau| rows when present, rewards |tau| entries.
struct Trajectory {
  nn::Tensor states;
  std::optional<nn::Tensor> actions;
  std::vector<double> rewards;
  TrajectoryMeta meta;

  std::size_t length() const { return rewards.size(); }
  std::size_t state_dim() const { return states.cols(); }
  bool labelled() const { return actions.has_value(); }

  /// Throws std::invalid_argument when lengths or the return are inconsistent.
  void validate() const;

  /// Copy without actions.
  Trajectory stripped() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

double sum_rewards(const std::vector<double>& rewards);

/// A collection of trajectories of one environment.
struct Dataset {
  std::string env_id;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<Trajectory> trajectories;
  /// Free-form provenance (generation spec, split protocol, seeds).
  Json provenance = Json::object();

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
  std::size_t transition_count() const;
  std::vector<double> returns() const;
  /// Same header and provenance, no trajectories.
  Dataset empty_like() const;
};

}  // namespace ssorl::env
