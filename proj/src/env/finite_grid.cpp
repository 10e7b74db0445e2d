#include "ssorl/env/finite_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace ssorl::env {

void FiniteMdp::validate() const {
  if (initial.size() != n_states || transition.size() != n_states * n_actions * n_states) {
    throw std::invalid_argument("FiniteMdp: table sizes do not match state/action counts");
  }
  for (std::size_t row = 0; row < n_states * n_actions; ++row) {
    double total = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) total += transition[row * n_states + s];
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("FiniteMdp: transition row does not sum to 1");
  }
}

FiniteMdp make_finite_grid(const FiniteGridParams& params) {
  if (params.slip < 0.0 || params.slip > 1.0) throw std::invalid_argument("finite grid: slip must be in [0, 1]");
  FiniteMdp mdp;
  mdp.n_states = params.width * params.height;
  mdp.n_actions = 4;
  mdp.initial.assign(mdp.n_states, 1.0 / static_cast<double>(mdp.n_states));
  mdp.transition.assign(mdp.n_states * 4 * mdp.n_states, 0.0);
  const int dx[4] = {0, 0, -1, 1};
  const int dy[4] = {-1, 1, 0, 0};
  auto move = [&](std::size_t s, int dir) {
    const int x = static_cast<int>(s % params.width) + dx[dir];
    const int y = static_cast<int>(s / params.width) + dy[dir];
    if (x < 0 || y < 0 || x >= static_cast<int>(params.width) || y >= static_cast<int>(params.height)) return s;
    return static_cast<std::size_t>(y) * params.width + static_cast<std::size_t>(x);
  };
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < 4; ++a) {
      double* row = &mdp.transition[(s * 4 + a) * mdp.n_states];
      row[move(s, static_cast<int>(a))] += 1.0 - params.slip;
      for (int d = 0; d < 4; ++d) row[move(s, d)] += params.slip / 4.0;
    }
  }
  return mdp;
}

BehaviorTable::BehaviorTable(std::size_t n_states, std::size_t n_actions, std::size_t order, std::vector<double> probs)
    : n_states_(n_states), n_actions_(n_actions), order_(order), probs_(std::move(probs)) {
  std::size_t contexts = 1;
  for (std::size_t i = 0; i <= order; ++i) contexts *= n_states;
  if (probs_.size() != contexts * n_actions) throw std::invalid_argument("BehaviorTable: wrong table size");
}

BehaviorTable BehaviorTable::random(std::size_t n_states, std::size_t n_actions, std::size_t order, Rng& rng) {
  std::size_t contexts = 1;
  for (std::size_t i = 0; i <= order; ++i) contexts *= n_states;
  std::vector<double> probs(contexts * n_actions);
  for (std::size_t c = 0; c < contexts; ++c) {
    double total = 0.0;
    for (std::size_t a = 0; a < n_actions; ++a) total += probs[c * n_actions + a] = 0.1 + rng.uniform();
    for (std::size_t a = 0; a < n_actions; ++a) probs[c * n_actions + a] /= total;
  }
  return BehaviorTable(n_states, n_actions, order, std::move(probs));
}

double BehaviorTable::prob(std::span<const std::size_t> history, std::size_t t, std::size_t action) const {
  if (history.size() <= t) throw std::invalid_argument("BehaviorTable::prob: history too short");
  std::size_t context = 0;
  for (std::size_t i = 0; i <= order_; ++i) {
    const std::size_t back = order_ - i;
    const std::size_t idx = t >= back ? t - back : 0;
    context = context * n_states_ + history[idx];
  }
  return probs_[context * n_actions_ + action];
}

std::vector<double> exact_action_posterior(const FiniteMdp& mdp, const BehaviorTable& policy,
                                           std::span<const std::size_t> states, std::size_t t) {
  const std::size_t length = states.size();
  if (length < 2 || t + 1 >= length) throw std::invalid_argument("exact_action_posterior: need t + 1 < sequence length");
  const std::size_t steps = length - 1;
  const std::size_t A = mdp.n_actions;
  std::vector<double> posterior(A, 0.0);
  std::vector<std::size_t> actions(steps, 0);
  // Odometer over every action sequence.
  while (true) {
    double p = mdp.initial[states[0]];
    for (std::size_t j = 0; j < steps && p != 0.0; ++j) {
      p *= policy.prob(states, j, actions[j]) * mdp.prob(states[j], actions[j], states[j + 1]);
    }
    posterior[actions[t]] += p;
    std::size_t pos = 0;
    while (pos < steps && ++actions[pos] == A) actions[pos++] = 0;
    if (pos == steps) break;
  }
  double total = 0.0;
  for (double p : posterior) total += p;
  if (total == 0.0) throw std::invalid_argument("exact_action_posterior: state sequence has zero probability");
  for (double& p : posterior) p /= total;
  return posterior;
}

std::vector<double> local_action_posterior(const FiniteMdp& mdp, const BehaviorTable& policy, std::size_t state,
                                           std::size_t next_state) {
  if (policy.order() != 0) throw std::invalid_argument("local_action_posterior: needs a Markovian table");
  const std::size_t history[1] = {state};
  std::vector<double> out(mdp.n_actions);
  double total = 0.0;
  for (std::size_t a = 0; a < mdp.n_actions; ++a) {
    total += out[a] = policy.prob(history, 0, a) * mdp.prob(state, a, next_state);
  }
  if (total == 0.0) throw std::invalid_argument("local_action_posterior: transition has zero probability");
  for (double& p : out) p /= total;
  return out;
}

}  // namespace ssorl::env
