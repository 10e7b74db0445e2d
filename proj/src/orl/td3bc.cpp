#include "ssorl/orl/td3bc.hpp"

#include <algorithm>
#include <cmath>

#include "ssorl/nn/optim.hpp"

namespace ssorl::orl {

using nn::Graph;
using nn::Var;

namespace {

std::vector<std::size_t> sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

}  // namespace

Td3bcState init_td3bc(std::size_t state_dim, std::size_t action_dim, const TrainerConfig& config, std::uint64_t seed) {
  Td3bcState st;
  st.actor_net = nn::Mlp("actor", sizes(state_dim, config.actor_hidden, action_dim), nn::Activation::kRelu,
                         nn::Activation::kTanh);
  st.q1_net = nn::Mlp("q1", sizes(state_dim + action_dim, config.critic_hidden, 1));
  st.q2_net = nn::Mlp("q2", sizes(state_dim + action_dim, config.critic_hidden, 1));
  Rng rng(derive_seed(seed, 0x7d3));
  st.actor_net.init(st.actor, rng);
  st.q1_net.init(st.critic, rng);
  st.q2_net.init(st.critic, rng);
  st.actor_target = st.actor;
  st.critic_target = st.critic;
  return st;
}

Tensor td3bc_target_noise(std::size_t n, std::size_t action_dim, const TrainerConfig& config, Rng& rng) {
  Tensor noise = Tensor::matrix(n, action_dim);
  for (double& v : noise.storage()) v = std::clamp(config.policy_noise * rng.normal(), -config.noise_clip, config.noise_clip);
  return noise;
}

Var td3bc_critic_loss(Graph& g, Td3bcState& st, const TransitionData& batch, const Tensor& noise,
                      const TrainerConfig& config) {
  // Target: everything from frozen copies.
  Var s2 = g.constant(batch.next_states);
  Var a2 = clamp(st.actor_net.forward_frozen(g, st.actor_target, s2) + g.constant(noise), -1.0, 1.0);
  Var sa2 = nn::concat_cols({s2, a2});
  Var q_next = minimum(st.q1_net.forward_frozen(g, st.critic_target, sa2), st.q2_net.forward_frozen(g, st.critic_target, sa2));
  Var y = detach(g.constant(batch.rewards) + config.discount * (g.constant(batch.not_done) * q_next));

  Var sa = g.constant(concat_tensors_cols(batch.states, batch.actions));
  Var q1 = st.q1_net.forward(g, st.critic, sa);
  Var q2 = st.q2_net.forward(g, st.critic, sa);
  return mean(square(q1 - y)) + mean(square(q2 - y));
}

double td3bc_lambda(const Td3bcState& st, const TransitionData& batch, double alpha) {
  const Tensor pi = st.actor_net.evaluate(st.actor, batch.states);
  const Tensor q = st.q1_net.evaluate(st.critic, concat_tensors_cols(batch.states, pi));
  double total = 0.0;
  for (double v : q.storage()) total += std::abs(v);
  const double mean_abs = total / static_cast<double>(q.size());
  return alpha / std::max(mean_abs, 1e-8);
}

Var td3bc_actor_loss(Graph& g, Td3bcState& st, const TransitionData& batch, double lambda) {
  Var s = g.constant(batch.states);
  Var pi = st.actor_net.forward(g, st.actor, s);
  Var q = st.q1_net.forward_frozen(g, st.critic, nn::concat_cols({s, pi}));
  return -lambda * mean(q) + mean(square(pi - g.constant(batch.actions)));
}

TrainedAgent train_td3bc(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed) {
  require_actions(combined, "train_td3bc");
  TrainedAgent agent;
  agent.algorithm = Algorithm::kTd3bc;
  agent.config = config;
  agent.seed = seed;
  agent.state_dim = combined.state_dim;
  agent.action_dim = combined.action_dim;
  agent.normalizer = StateNormalizer::fit(combined);
  const TransitionData data = flatten_transitions(combined, agent.normalizer);

  Td3bcState st = init_td3bc(agent.state_dim, agent.action_dim, config, seed);
  Rng rng(derive_seed(seed, 0xb47c4));
  nn::AdamConfig actor_opt{config.actor_lr}, critic_opt{config.critic_lr};
  double last_actor = 0.0;
  for (std::size_t it = 1; it <= config.budget; ++it) {
    const TransitionData batch = sample_batch(data, config.batch_size, rng);
    const Tensor noise = td3bc_target_noise(batch.size(), agent.action_dim, config, rng);
    double critic_value;
    {
      Graph g;
      Var loss = td3bc_critic_loss(g, st, batch, noise, config);
      critic_value = loss.value().item();
      if (!std::isfinite(critic_value)) throw std::runtime_error("train_td3bc: non-finite critic loss at iteration " + std::to_string(it));
      g.backward(loss);
      nn::adam_step(st.critic, g.gradients(st.critic), critic_opt);
    }
    if (it % config.policy_delay == 0) {
      const double lambda = td3bc_lambda(st, batch, config.alpha);
      Graph g;
      Var loss = td3bc_actor_loss(g, st, batch, lambda);
      last_actor = loss.value().item();
      g.backward(loss);
      nn::adam_step(st.actor, g.gradients(st.actor), actor_opt);
      nn::soft_update(st.critic_target, st.critic, config.tau);
      nn::soft_update(st.actor_target, st.actor, config.tau);
    }
    if (config.log_every && (it % config.log_every == 0 || it == config.budget)) {
      agent.metrics.push_back({{"iteration", it}, {"critic_loss", critic_value}, {"actor_loss", last_actor}});
    }
  }
  agent.actor = std::move(st.actor);
  agent.critic = std::move(st.critic);
  return agent;
}

}  // namespace ssorl::orl
