#pragma once

#include "ssorl/nn/autodiff.hpp"
#include "ssorl/nn/layers.hpp"
#include "ssorl/orl/agent.hpp"

namespace ssorl::orl {

/// Tanh-Gaussian actor, twin critics with targets, learnable log-temperature.
struct CqlState {
  nn::Mlp actor_net;  // outputs [mean, log_std]
  nn::Mlp q1_net;
  nn::Mlp q2_net;
  nn::ParamSet actor;
  nn::ParamSet critic;
  nn::ParamSet critic_target;
  nn::ParamSet temperature;  // "log_alpha" [1, 1]
};

CqlState init_cql(std::size_t state_dim, std::size_t action_dim, const TrainerConfig& config, std::uint64_t seed);

struct PolicySample {
  Tensor action;    // [n, action_dim]
  Tensor log_prob;  // [n, 1]
};

/// Reparameterized tanh-Gaussian draw on the graph with noise `eps`.
struct GraphPolicySample {
  nn::Var action;
  nn::Var log_prob;
};
GraphPolicySample cql_policy_sample(nn::Graph& g, CqlState& state, nn::Var states, const Tensor& eps,
                                    const TrainerConfig& config);

/// Draw without gradient bookkeeping.
PolicySample cql_sample_actions(const CqlState& state, const Tensor& states, const Tensor& eps,
                                const TrainerConfig& config);

/// Deterministic action tanh(mean).
Tensor cql_mean_action(const CqlState& state, const Tensor& states);

/// Sampled actions for the conservative penalty, N per batch state, row
/// i*N + j belonging to state i. Log densities are those the sampler used.
struct CqlSamples {
  std::size_t per_state = 0;
  PolicySample uniform;  // U[-1, 1]^d, log density -d log 2
  PolicySample current;  // pi(. | s)
  PolicySample next;     // pi(. | s'), evaluated at s
};
CqlSamples draw_cql_samples(const CqlState& state, const TransitionData& batch, const TrainerConfig& config, Rng& rng);

/// min_q_weight * (mean_s logsumexp_j [Q(s, a_j) - log q(a_j)] - mean Q(s, a_data)),
/// summed over both critics.
nn::Var cql_penalty(nn::Graph& g, CqlState& state, const TransitionData& batch, const CqlSamples& samples,
                    double min_q_weight);

/// Bellman error of both critics (target actions from `next_action`) plus the penalty.
nn::Var cql_critic_loss(nn::Graph& g, CqlState& state, const TransitionData& batch, const Tensor& next_action,
                        const CqlSamples& samples, const TrainerConfig& config);

/// mean(alpha * log pi(a|s) - min(Q1, Q2)(s, a)), a ~ pi; critic fixed.
nn::Var cql_actor_loss(nn::Graph& g, CqlState& state, const TransitionData& batch, const Tensor& eps, double alpha,
                       const TrainerConfig& config);

/// -log_alpha * mean(log_prob + target_entropy), log_prob held constant.
nn::Var temperature_loss(nn::Graph& g, nn::ParamSet& temperature, const Tensor& log_prob, double target_entropy);

TrainedAgent train_cql(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed);

}  // namespace ssorl::orl
