#include "ssorl/env/alternating.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssorl/env/policies.hpp"

namespace ssorl::env {

Json AlternatingParams::to_json() const {
  return Json{{"dt", dt},
              {"x_range", x_range},
              {"horizon", horizon},
              {"reference_rollouts", reference_rollouts},
              {"reference_seed", reference_seed}};
}

AlternatingParams AlternatingParams::from_json(const Json& j) {
  AlternatingParams p;
  p.dt = j.value("dt", p.dt);
  p.x_range = j.value("x_range", p.x_range);
  p.horizon = j.value("horizon", p.horizon);
  p.reference_rollouts = j.value("reference_rollouts", p.reference_rollouts);
  p.reference_seed = j.value("reference_seed", p.reference_seed);
  return p;
}

namespace {

// Drives x to the origin: the reference "expert" for normalization.
class CenteringPolicy final : public Policy {
 public:
  explicit CenteringPolicy(double dt) : dt_(dt) {}
  Vec act(std::span<const double> state, Rng&) override {
    if (state[1] == 0.0) return {std::clamp(-state[0] / dt_, -1.0, 1.0), 0.0};
    return {0.0, 0.0};
  }

 private:
  double dt_;
};

double mean_return(const MdpSpec& mdp, Policy& policy, std::size_t n, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += rollout(mdp, policy, derive_seed(seed, i)).meta.total_return;
  return total / static_cast<double>(n);
}

}  // namespace

MdpSpec make_alternating(const AlternatingParams& params) {
  if (params.horizon < 2) throw std::invalid_argument("alternating: horizon must be >= 2");
  MdpSpec mdp;
  mdp.id = "alternating";
  mdp.state_dim = 2;
  mdp.action_dim = 2;
  mdp.horizon = params.horizon;
  mdp.params = params.to_json();
  const double range = params.x_range;
  mdp.initial_state = [range](Rng& rng) { return Vec{rng.uniform(-range, range), 0.0}; };
  const double dt = params.dt;
  mdp.transition = [dt](std::span<const double> s, std::span<const double> a) {
    StepResult out;
    const bool even = s[1] == 0.0;
    const double x = even ? s[0] + a[0] * dt : a[0];
    out.next_state = {x, even ? 1.0 : 0.0};
    out.reward = std::exp(-std::abs(x));
    return out;
  };
  auto random = make_behavior_policy(random_tier(), mdp);
  mdp.random_ref = mean_return(mdp, *random, params.reference_rollouts, params.reference_seed);
  CenteringPolicy expert(dt);
  mdp.expert_ref = mean_return(mdp, expert, params.reference_rollouts, params.reference_seed + 1);
  return mdp;
}

StyleOracle alternating_style_oracle(std::span<const double> window_states, std::size_t k,
                                     const AlternatingParams& params) {
  const std::size_t rows = k + 2;
  if (window_states.size() != rows * 2) {
    throw std::invalid_argument("alternating_style_oracle: expected " + std::to_string(rows * 2) + " values, got " +
                                std::to_string(window_states.size()));
  }
  auto x = [&](std::size_t r) { return window_states[2 * r]; };
  auto parity = [&](std::size_t r) { return window_states[2 * r + 1]; };

  StyleOracle out;
  if (parity(k) == 0.0) {
    out.mse = 0.0;  // dead channel is 0 at even steps
    return out;
  }

  // First real row: padding repeats the first state.
  std::size_t first = 0;
  while (first + 1 < rows && x(first + 1) == x(first) && parity(first + 1) == parity(first)) ++first;

  const double tol = 1e-9;
  double like[2] = {1.0, 1.0};
  for (int zi = 0; zi < 2; ++zi) {
    const double z = zi == 0 ? -1.0 : 1.0;
    for (std::size_t r = first; r + 1 < rows; ++r) {
      if (parity(r) != 0.0) continue;
      if (std::abs(x(r + 1) - (x(r) + z * params.dt)) > tol) like[zi] = 0.0;
    }
    if (parity(first) != 0.0) {
      // The odd state follows an even step from x ~ U[-x_range, x_range].
      const double lo = -params.x_range + z * params.dt - tol;
      const double hi = params.x_range + z * params.dt + tol;
      if (x(first) < lo || x(first) > hi) like[zi] = 0.0;
    }
  }
  const double total = like[0] + like[1];
  if (total == 0.0) throw std::invalid_argument("alternating_style_oracle: window impossible under both styles");
  out.posterior_plus = like[1] / total;
  out.mse = 4.0 * out.posterior_plus * (1.0 - out.posterior_plus);
  return out;
}

}  // namespace ssorl::env
