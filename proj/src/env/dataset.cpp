#include <stdexcept>

#include "ssorl/env/trajectory.hpp"

namespace ssorl::env {

double sum_rewards(const std::vector<double>& rewards) {
  double total = 0.0;
  for (double r : rewards) total += r;
  return total;
}

void Trajectory::validate() const {
  const std::size_t n = rewards.size();
  if (states.rows() != n + 1) {
    throw std::invalid_argument("trajectory has " + std::to_string(states.rows()) + " states for " + std::to_string(n) +
                                " steps");
  }
  if (actions && actions->rows() != n) {
    throw std::invalid_argument("trajectory has " + std::to_string(actions->rows()) + " actions for " +
                                std::to_string(n) + " steps");
  }
  if (meta.total_return != sum_rewards(rewards)) throw std::invalid_argument("trajectory return metadata != sum of rewards");
}

Trajectory Trajectory::stripped() const {
  Trajectory out = *this;
  out.actions.reset();
  return out;
}

std::size_t Dataset::transition_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.length();
  return n;
}

std::vector<double> Dataset::returns() const {
  std::vector<double> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) out.push_back(t.meta.total_return);
  return out;
}

Dataset Dataset::empty_like() const {
  Dataset out;
  out.env_id = env_id;
  out.state_dim = state_dim;
  out.action_dim = action_dim;
  out.provenance = provenance;
  return out;
}

}  // namespace ssorl::env
