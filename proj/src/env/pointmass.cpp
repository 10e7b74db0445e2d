#include "ssorl/env/pointmass.hpp"

#include <algorithm>
#include <cmath>

#include "ssorl/env/policies.hpp"

namespace ssorl::env {

Json PointMassParams::to_json() const {
  return Json{{"dt", dt},
              {"v_max", v_max},
              {"arena", arena},
              {"goal", {goal[0], goal[1]}},
              {"horizon", horizon},
              {"negative_reward", negative_reward},
              {"reference_rollouts", reference_rollouts},
              {"reference_seed", reference_seed}};
}

PointMassParams PointMassParams::from_json(const Json& j) {
  PointMassParams p;
  p.dt = j.value("dt", p.dt);
  p.v_max = j.value("v_max", p.v_max);
  p.arena = j.value("arena", p.arena);
  if (j.contains("goal")) p.goal = {j["goal"].at(0).get<double>(), j["goal"].at(1).get<double>()};
  p.horizon = j.value("horizon", p.horizon);
  p.negative_reward = j.value("negative_reward", p.negative_reward);
  p.reference_rollouts = j.value("reference_rollouts", p.reference_rollouts);
  p.reference_seed = j.value("reference_seed", p.reference_seed);
  return p;
}

StepResult pointmass_transition(const PointMassParams& p, std::span<const double> state, std::span<const double> action) {
  StepResult out;
  out.next_state.resize(4);
  double dist_sq = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double v = std::clamp(state[2 + i] + action[i] * p.dt, -p.v_max, p.v_max);
    const double x = std::clamp(state[i] + v * p.dt, -p.arena, p.arena);
    out.next_state[i] = x;
    out.next_state[2 + i] = v;
    dist_sq += (x - p.goal[i]) * (x - p.goal[i]);
  }
  const double reward = std::exp(-std::sqrt(dist_sq));
  out.reward = p.negative_reward ? -reward : reward;
  return out;
}

MdpSpec make_pointmass(const PointMassParams& params) {
  MdpSpec mdp;
  mdp.id = "pointmass";
  mdp.state_dim = 4;
  mdp.action_dim = 2;
  mdp.horizon = params.horizon;
  mdp.params = params.to_json();
  const double arena = params.arena;
  mdp.initial_state = [arena](Rng& rng) {
    return Vec{rng.uniform(-arena, arena), rng.uniform(-arena, arena), 0.0, 0.0};
  };
  mdp.transition = [params](std::span<const double> s, std::span<const double> a) {
    return pointmass_transition(params, s, a);
  };
  mdp.random_ref = mean_policy_return(mdp, random_tier(), params.reference_rollouts, params.reference_seed);
  mdp.expert_ref = mean_policy_return(mdp, expert_tier(), params.reference_rollouts, params.reference_seed + 1);
  return mdp;
}

}  // namespace ssorl::env
