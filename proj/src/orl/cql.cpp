#include "ssorl/orl/cql.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssorl/nn/optim.hpp"

namespace ssorl::orl {

using nn::Graph;
using nn::Var;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

std::vector<std::size_t> sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

Tensor gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.storage()) v = rng.normal();
  return t;
}

// Each row of `t` repeated `times` times in place.
Tensor repeat_rows(const Tensor& t, std::size_t times) {
  std::vector<std::size_t> rows;
  rows.reserve(t.rows() * times);
  for (std::size_t r = 0; r < t.rows(); ++r) rows.insert(rows.end(), times, r);
  return take_rows(t, rows);
}

}  // namespace

CqlState init_cql(std::size_t state_dim, std::size_t action_dim, const TrainerConfig& config, std::uint64_t seed) {
  CqlState st;
  st.actor_net = nn::Mlp("actor", sizes(state_dim, config.actor_hidden, 2 * action_dim));
  st.q1_net = nn::Mlp("q1", sizes(state_dim + action_dim, config.critic_hidden, 1));
  st.q2_net = nn::Mlp("q2", sizes(state_dim + action_dim, config.critic_hidden, 1));
  Rng rng(derive_seed(seed, 0xc91));
  st.actor_net.init(st.actor, rng);
  st.q1_net.init(st.critic, rng);
  st.q2_net.init(st.critic, rng);
  st.critic_target = st.critic;
  st.temperature.add("log_alpha", Tensor::scalar(config.init_log_temperature));
  return st;
}

GraphPolicySample cql_policy_sample(Graph& g, CqlState& st, Var states, const Tensor& eps, const TrainerConfig& config) {
  const std::size_t ad = eps.cols();
  Var out = st.actor_net.forward(g, st.actor, states);
  Var mu = slice_cols(out, 0, ad);
  Var log_std = clamp(slice_cols(out, ad, 2 * ad), config.log_std_min, config.log_std_max);
  Var a = tanh(mu + exp(log_std) * g.constant(eps));
  Tensor base = eps;
  for (double& v : base.storage()) v = -0.5 * v * v - kHalfLog2Pi;
  Var log_prob = sum_rows(g.constant(base) - log_std) - sum_rows(log(1.0 - square(a) + 1e-6));
  return {a, log_prob};
}

PolicySample cql_sample_actions(const CqlState& st, const Tensor& states, const Tensor& eps, const TrainerConfig& config) {
  const std::size_t ad = eps.cols();
  const Tensor out = st.actor_net.evaluate(st.actor, states);
  PolicySample s{Tensor::matrix(states.rows(), ad), Tensor::matrix(states.rows(), 1)};
  for (std::size_t r = 0; r < states.rows(); ++r) {
    double lp = 0.0;
    for (std::size_t c = 0; c < ad; ++c) {
      const double ls = std::clamp(out.at(r, ad + c), config.log_std_min, config.log_std_max);
      const double e = eps.at(r, c);
      const double a = std::tanh(out.at(r, c) + std::exp(ls) * e);
      s.action.at(r, c) = a;
      lp += -0.5 * e * e - kHalfLog2Pi - ls - std::log(1.0 - a * a + 1e-6);
    }
    s.log_prob[r] = lp;
  }
  return s;
}

Tensor cql_mean_action(const CqlState& st, const Tensor& states) {
  const Tensor out = st.actor_net.evaluate(st.actor, states);
  const std::size_t ad = out.cols() / 2;
  Tensor a = Tensor::matrix(states.rows(), ad);
  for (std::size_t r = 0; r < states.rows(); ++r) {
    for (std::size_t c = 0; c < ad; ++c) a.at(r, c) = std::tanh(out.at(r, c));
  }
  return a;
}

CqlSamples draw_cql_samples(const CqlState& st, const TransitionData& batch, const TrainerConfig& config, Rng& rng) {
  const std::size_t n = batch.size(), N = config.n_action_samples, ad = batch.actions.cols();
  CqlSamples s;
  s.per_state = N;
  s.uniform.action = Tensor::matrix(n * N, ad);
  for (double& v : s.uniform.action.storage()) v = rng.uniform(-1.0, 1.0);
  s.uniform.log_prob = Tensor::matrix(n * N, 1, -static_cast<double>(ad) * std::log(2.0));
  s.current = cql_sample_actions(st, repeat_rows(batch.states, N), gaussian(n * N, ad, rng), config);
  s.next = cql_sample_actions(st, repeat_rows(batch.next_states, N), gaussian(n * N, ad, rng), config);
  return s;
}

Var cql_penalty(Graph& g, CqlState& st, const TransitionData& batch, const CqlSamples& samples, double min_q_weight) {
  const std::size_t n = batch.size(), N = samples.per_state;
  const Tensor s_rep = repeat_rows(batch.states, N);
  const Tensor data_sa = concat_tensors_cols(batch.states, batch.actions);
  Var total;
  bool first = true;
  for (const nn::Mlp* net : {&st.q1_net, &st.q2_net}) {
    auto corrected = [&](const PolicySample& ps) {
      Var q = net->forward(g, st.critic, g.constant(concat_tensors_cols(s_rep, ps.action)));
      return reshape(q, n, N) - g.constant(ps.log_prob.reshaped({n, N}));
    };
    Var cat = nn::concat_cols({corrected(samples.uniform), corrected(samples.next), corrected(samples.current)});
    Var q_data = net->forward(g, st.critic, g.constant(data_sa));
    Var pen = min_q_weight * (mean(logsumexp_rows(cat)) - mean(q_data));
    total = first ? pen : total + pen;
    first = false;
  }
  return total;
}

Var cql_critic_loss(Graph& g, CqlState& st, const TransitionData& batch, const Tensor& next_action,
                    const CqlSamples& samples, const TrainerConfig& config) {
  Var sa2 = g.constant(concat_tensors_cols(batch.next_states, next_action));
  Var q_next = minimum(st.q1_net.forward_frozen(g, st.critic_target, sa2), st.q2_net.forward_frozen(g, st.critic_target, sa2));
  Var y = detach(g.constant(batch.rewards) + config.discount * (g.constant(batch.not_done) * q_next));
  Var sa = g.constant(concat_tensors_cols(batch.states, batch.actions));
  Var bellman = mean(square(st.q1_net.forward(g, st.critic, sa) - y)) + mean(square(st.q2_net.forward(g, st.critic, sa) - y));
  if (config.min_q_weight == 0.0) return bellman;
  return bellman + cql_penalty(g, st, batch, samples, config.min_q_weight);
}

Var cql_actor_loss(Graph& g, CqlState& st, const TransitionData& batch, const Tensor& eps, double alpha,
                   const TrainerConfig& config) {
  Var s = g.constant(batch.states);
  auto sample = cql_policy_sample(g, st, s, eps, config);
  Var sa = nn::concat_cols({s, sample.action});
  Var q = minimum(st.q1_net.forward_frozen(g, st.critic, sa), st.q2_net.forward_frozen(g, st.critic, sa));
  return mean(alpha * sample.log_prob - q);
}

Var temperature_loss(Graph& g, nn::ParamSet& temperature, const Tensor& log_prob, double target_entropy) {
  Tensor shifted = log_prob;
  for (double& v : shifted.storage()) v += target_entropy;
  return -1.0 * mean(g.param(temperature, "log_alpha") * g.constant(shifted));
}

TrainedAgent train_cql(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed) {
  require_actions(combined, "train_cql");
  TrainedAgent agent;
  agent.algorithm = Algorithm::kCql;
  agent.config = config;
  agent.seed = seed;
  agent.state_dim = combined.state_dim;
  agent.action_dim = combined.action_dim;
  agent.normalizer = StateNormalizer::fit(combined);
  const TransitionData data = flatten_transitions(combined, agent.normalizer);
  const std::size_t ad = agent.action_dim;
  const double target_entropy = -static_cast<double>(ad);

  CqlState st = init_cql(agent.state_dim, ad, config, seed);
  Rng rng(derive_seed(seed, 0xc9172));
  nn::AdamConfig actor_opt{config.actor_lr}, critic_opt{config.critic_lr}, temp_opt{config.temperature_lr};
  for (std::size_t it = 1; it <= config.budget; ++it) {
    const TransitionData batch = sample_batch(data, config.batch_size, rng);
    const double alpha = std::exp(st.temperature.value("log_alpha").item());

    double actor_value, critic_value;
    Tensor log_prob;
    {
      Graph g;
      const Tensor eps = gaussian(batch.size(), ad, rng);
      Var loss = cql_actor_loss(g, st, batch, eps, alpha, config);
      actor_value = loss.value().item();
      log_prob = cql_sample_actions(st, batch.states, eps, config).log_prob;
      g.backward(loss);
      nn::adam_step(st.actor, g.gradients(st.actor), actor_opt);
    }
    {
      Graph g;
      Var loss = temperature_loss(g, st.temperature, log_prob, target_entropy);
      g.backward(loss);
      nn::adam_step(st.temperature, g.gradients(st.temperature), temp_opt);
    }
    {
      const Tensor next_action = cql_sample_actions(st, batch.next_states, gaussian(batch.size(), ad, rng), config).action;
      const CqlSamples samples = draw_cql_samples(st, batch, config, rng);
      Graph g;
      Var loss = cql_critic_loss(g, st, batch, next_action, samples, config);
      critic_value = loss.value().item();
      if (!std::isfinite(critic_value)) throw std::runtime_error("train_cql: non-finite critic loss at iteration " + std::to_string(it));
      g.backward(loss);
      nn::adam_step(st.critic, g.gradients(st.critic), critic_opt);
      nn::soft_update(st.critic_target, st.critic, config.tau);
    }
    if (config.log_every && (it % config.log_every == 0 || it == config.budget)) {
      agent.metrics.push_back({{"iteration", it}, {"critic_loss", critic_value}, {"actor_loss", actor_value}, {"alpha", alpha}});
    }
  }
  agent.actor = std::move(st.actor);
  agent.critic = std::move(st.critic);
  agent.extra["log_alpha"] = st.temperature.value("log_alpha").item();
  return agent;
}

}  // namespace ssorl::orl
