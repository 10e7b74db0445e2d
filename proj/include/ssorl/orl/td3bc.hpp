#pragma once

#include "ssorl/nn/autodiff.hpp"
#include "ssorl/nn/layers.hpp"
#include "ssorl/orl/agent.hpp"

namespace ssorl::orl {

/// Deterministic tanh actor, twin critics and their target copies.
struct Td3bcState {
  nn::Mlp actor_net;
  nn::Mlp q1_net;
  nn::Mlp q2_net;
  nn::ParamSet actor;
  nn::ParamSet actor_target;
  nn::ParamSet critic;
  nn::ParamSet critic_target;
};

Td3bcState init_td3bc(std::size_t state_dim, std::size_t action_dim, const TrainerConfig& config, std::uint64_t seed);

/// Target policy smoothing noise: N(0, policy_noise^2) clipped to +-noise_clip.
Tensor td3bc_target_noise(std::size_t n, std::size_t action_dim, const TrainerConfig& config, Rng& rng);

/// Sum of the twin critics' mean squared Bellman errors against the
/// smoothed target r + discount * not_done * min(Q1', Q2')(s', pi'(s') + noise).
nn::Var td3bc_critic_loss(nn::Graph& g, Td3bcState& state, const TransitionData& batch, const Tensor& noise,
                          const TrainerConfig& config);

/// alpha / mean|Q1(s, pi(s))| over the batch (treated as a constant).
double td3bc_lambda(const Td3bcState& state, const TransitionData& batch, double alpha);

/// -lambda * mean Q1(s, pi(s)) + mean (pi(s) - a)^2; critic parameters held fixed.
nn::Var td3bc_actor_loss(nn::Graph& g, Td3bcState& state, const TransitionData& batch, double lambda);

TrainedAgent train_td3bc(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed);

}  // namespace ssorl::orl
