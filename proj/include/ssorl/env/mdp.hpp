#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"
#include "ssorl/common/random.hpp"
#include "ssorl/env/trajectory.hpp"

namespace ssorl::env {

using Vec = std::vector<double>;

struct StepResult {
  Vec next_state;
  double reward = 0.0;
};

/// Continuous-state episodic MDP with pure transition and reward functions.
struct MdpSpec {
  std::string id;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double action_low = -1.0;
  double action_high = 1.0;
  std::size_t horizon = 0;
  double discount = 0.99;
  std::function<Vec(Rng&)> initial_state;
  /// Deterministic dynamics; receives an action already inside the bounds.
  std::function<StepResult(std::span<const double> state, std::span<const double> action)> transition;
  /// Normalization references: mean returns of the uniform-random policy
  /// and of the expert tier policy.
  double random_ref = 0.0;
  double expert_ref = 1.0;
  /// Parameters the environment was built from (round-trips via make_env).
  Json params = Json::object();

  double normalize(double raw_return) const;
  Vec clamp_action(std::span<const double> action) const;
};

/// Validates finiteness, clamps the action into bounds and applies the
/// dynamics. Throws std::domain_error on non-finite input.
StepResult step(const MdpSpec& mdp, std::span<const double> state, std::span<const double> action);

/// Anything that emits actions during a rollout: behavior policies and
/// trained agents.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Called once at the start of an episode.
  virtual void reset(std::span<const double> initial_state, Rng& rng) {
    (void)initial_state;
    (void)rng;
  }
  virtual Vec act(std::span<const double> state, Rng& rng) = 0;
  /// Called after every environment step with the (clamped) action taken.
  virtual void observe(std::span<const double> action, double reward, std::span<const double> next_state) {
    (void)action;
    (void)reward;
    (void)next_state;
  }
};

/// Full-horizon episode. Deterministic in (mdp, policy parameters, seed).
Trajectory rollout(const MdpSpec& mdp, Policy& policy, std::uint64_t seed);

/// Builds an environment from its id and parameter object ("pointmass",
/// "alternating"). Reference scores are computed on construction.
MdpSpec make_env(const std::string& id, const Json& params = Json::object());

}  // namespace ssorl::env
