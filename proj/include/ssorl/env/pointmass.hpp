#pragma once

#include <array>
#include <cstddef>

#include "ssorl/env/mdp.hpp"

namespace ssorl::env {

/// Force-actuated ball in a square arena. State (x, y, vx, vy), action
/// (ax, ay) in [-1, 1]^2.
///   v' = clamp(v + a dt, +-v_max),  x' = clamp(x + v' dt, +-arena)
///   reward = exp(-|x' - goal|)   (negated when negative_reward is set)
struct PointMassParams {
  double dt = 0.1;
  double v_max = 1.0;
  double arena = 2.0;
  std::array<double, 2> goal{1.0, 1.0};
  std::size_t horizon = 100;
  bool negative_reward = false;
  /// Rollouts used for the normalization references.
  std::size_t reference_rollouts = 100;
  std::uint64_t reference_seed = 20240101;

  Json to_json() const;
  static PointMassParams from_json(const Json& j);
};

MdpSpec make_pointmass(const PointMassParams& params = {});

/// The dynamics alone, without reference calibration.
StepResult pointmass_transition(const PointMassParams& params, std::span<const double> state,
                                std::span<const double> action);

}  // namespace ssorl::env
