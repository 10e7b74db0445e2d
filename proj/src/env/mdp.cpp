#include "ssorl/env/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssorl/env/alternating.hpp"
#include "ssorl/env/pointmass.hpp"

namespace ssorl::env {

double MdpSpec::normalize(double raw_return) const {
  const double span = expert_ref - random_ref;
  if (span == 0.0) throw std::domain_error("MdpSpec::normalize: expert and random references coincide");
  return (raw_return - random_ref) / span;
}

Vec MdpSpec::clamp_action(std::span<const double> action) const {
  Vec out(action.begin(), action.end());
  for (double& a : out) a = std::clamp(a, action_low, action_high);
  return out;
}

StepResult step(const MdpSpec& mdp, std::span<const double> state, std::span<const double> action) {
  if (state.size() != mdp.state_dim || action.size() != mdp.action_dim) {
    throw std::invalid_argument("step: expected state dim " + std::to_string(mdp.state_dim) + " and action dim " +
                                std::to_string(mdp.action_dim));
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(state.begin(), state.end(), finite)) throw std::domain_error("step: non-finite state");
  if (!std::all_of(action.begin(), action.end(), finite)) throw std::domain_error("step: non-finite action");
  const Vec clamped = mdp.clamp_action(action);
  return mdp.transition(state, clamped);
}

Trajectory rollout(const MdpSpec& mdp, Policy& policy, std::uint64_t seed) {
  Rng rng(seed);
  Vec state = mdp.initial_state(rng);
  policy.reset(state, rng);
  Trajectory traj;
  traj.states = nn::Tensor::matrix(mdp.horizon + 1, mdp.state_dim);
  nn::Tensor actions = nn::Tensor::matrix(mdp.horizon, mdp.action_dim);
  traj.rewards.reserve(mdp.horizon);
  std::copy(state.begin(), state.end(), traj.states.row_span(0).begin());
  for (std::size_t t = 0; t < mdp.horizon; ++t) {
    const Vec action = mdp.clamp_action(policy.act(state, rng));
    StepResult res = step(mdp, state, action);
    std::copy(action.begin(), action.end(), actions.row_span(t).begin());
    std::copy(res.next_state.begin(), res.next_state.end(), traj.states.row_span(t + 1).begin());
    traj.rewards.push_back(res.reward);
    policy.observe(action, res.reward, res.next_state);
    state = std::move(res.next_state);
  }
  traj.actions = std::move(actions);
  traj.meta.seed = seed;
  traj.meta.total_return = sum_rewards(traj.rewards);
  return traj;
}

MdpSpec make_env(const std::string& id, const Json& params) {
  if (id == "pointmass") return make_pointmass(PointMassParams::from_json(params));
  if (id == "alternating") return make_alternating(AlternatingParams::from_json(params));
  throw std::invalid_argument("make_env: unknown environment '" + id + "'");
}

}  // namespace ssorl::env
