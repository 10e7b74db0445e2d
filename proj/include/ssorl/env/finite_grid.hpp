#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ssorl/common/random.hpp"

namespace ssorl::env {

/// Tabular MDP used for exact-enumeration checks.
struct FiniteMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> initial;     // p(s_1), n_states entries
  std::vector<double> transition;  // P(s' | s, a) at (s * n_actions + a) * n_states + s'

  double prob(std::size_t s, std::size_t a, std::size_t next) const {
    return transition[(s * n_actions + a) * n_states + next];
  }
  void validate() const;
};

/// Grid world with up/down/left/right moves. With probability `slip` the move
/// goes in a uniformly random direction instead; moves into a wall stay put.
struct FiniteGridParams {
  std::size_t width = 3;
  std::size_t height = 3;
  double slip = 0.2;
};

FiniteMdp make_finite_grid(const FiniteGridParams& params = {});

/// Behavior policy as a table. An order-k table conditions on the k previous
/// states as well (s_{t-k}, ..., s_t), front-padded with s_1. Order 0 is
/// Markovian.
class BehaviorTable {
 public:
  BehaviorTable(std::size_t n_states, std::size_t n_actions, std::size_t order, std::vector<double> probs);

  /// Random table with every entry bounded away from zero.
  static BehaviorTable random(std::size_t n_states, std::size_t n_actions, std::size_t order, Rng& rng);

  std::size_t order() const { return order_; }
  std::size_t n_actions() const { return n_actions_; }
  /// Probability of `action` at step t (0-based) given the visited states
  /// s_1..s_{t+1} in `history` (history.size() > t).
  double prob(std::span<const std::size_t> history, std::size_t t, std::size_t action) const;

 private:
  std::size_t n_states_, n_actions_, order_;
  std::vector<double> probs_;
};

/// Exact p(a_t | s_1, ..., s_L) by brute-force enumeration of every action
/// sequence a_1..a_{L-1}. `t` is the 0-based index of the queried action and
/// must satisfy t + 1 < L. Throws std::invalid_argument when the state
/// sequence has zero probability.
std::vector<double> exact_action_posterior(const FiniteMdp& mdp, const BehaviorTable& policy,
                                           std::span<const std::size_t> states, std::size_t t);

/// Local posterior p(a | s_t, s_{t+1}) proportional to beta(a | s_t) P(s_{t+1} | s_t, a)
/// for a Markovian table.
std::vector<double> local_action_posterior(const FiniteMdp& mdp, const BehaviorTable& policy, std::size_t state,
                                           std::size_t next_state);

}  // namespace ssorl::env
