#pragma once

#include <cstddef>
#include <span>

#include "ssorl/env/mdp.hpp"

namespace ssorl::env {

/// Two-channel toy environment with state (x, parity).
///
/// Even parity: x' = x + a0 dt. Odd parity: x' = a0 (position reset).
/// Parity flips every step; channel a1 never affects the dynamics.
///
/// The alternating-style behavior policy draws z in {-1, +1} per episode and
/// plays (z, 0) at even steps and (u, z), u ~ U[-1, 1], at odd steps. The
/// dead channel a1 at an odd step therefore equals z, which is visible only
/// through the displacement of the preceding even step.
struct AlternatingParams {
  double dt = 0.1;
  double x_range = 1.0;  // initial x ~ U[-x_range, x_range]
  std::size_t horizon = 40;
  std::size_t reference_rollouts = 100;
  std::uint64_t reference_seed = 20240102;

  Json to_json() const;
  static AlternatingParams from_json(const Json& j);
};

MdpSpec make_alternating(const AlternatingParams& params = {});

struct StyleOracle {
  double posterior_plus = 0.5;  // P(z = +1 | window)
  double mse = 1.0;             // Bayes risk of the dead channel at the target step
};

/// Exact Bayes posterior over the style z given a window of k+2 states
/// (s_{t-k}, ..., s_t, s_{t+1}) from the AlternatingStyle environment, and
/// the resulting minimal mean-squared error for the dead action channel at
/// step t. Windows are front-padded by repeating the first state; repeated
/// consecutive states are treated as padding.
/// Throws std::invalid_argument if the window is impossible under both styles.
StyleOracle alternating_style_oracle(std::span<const double> window_states, std::size_t k,
                                     const AlternatingParams& params = {});

}  // namespace ssorl::env
