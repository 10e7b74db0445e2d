#include "ssorl/orl/common.hpp"

#include <cmath>
#include <stdexcept>

namespace ssorl::orl {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "td3bc") return Algorithm::kTd3bc;
  if (name == "cql") return Algorithm::kCql;
  if (name == "dt") return Algorithm::kDt;
  if (name == "dt-joint") return Algorithm::kDtJoint;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kTd3bc: return "td3bc";
    case Algorithm::kCql: return "cql";
    case Algorithm::kDt: return "dt";
    case Algorithm::kDtJoint: return "dt-joint";
  }
  return "unknown";
}

Json TrainerConfig::to_json() const {
  Json j{{"algorithm", algorithm_name(algorithm)},
         {"budget", budget},
         {"batch_size", batch_size},
         {"discount", discount},
         {"tau", tau},
         {"log_every", log_every},
         {"actor_hidden", actor_hidden},
         {"critic_hidden", critic_hidden},
         {"actor_lr", actor_lr},
         {"critic_lr", critic_lr},
         {"policy_noise", policy_noise},
         {"noise_clip", noise_clip},
         {"policy_delay", policy_delay},
         {"alpha", alpha},
         {"temperature_lr", temperature_lr},
         {"init_log_temperature", init_log_temperature},
         {"min_q_weight", min_q_weight},
         {"n_action_samples", n_action_samples},
         {"log_std_min", log_std_min},
         {"log_std_max", log_std_max},
         {"context", context},
         {"layers", layers},
         {"d_model", d_model},
         {"heads", heads},
         {"dt_lr", dt_lr},
         {"dt_weight_decay", dt_weight_decay},
         {"dt_temperature_lr", dt_temperature_lr},
         {"dt_init_temperature", dt_init_temperature},
         {"grad_clip", grad_clip},
         {"warmup_steps", warmup_steps},
         {"lambda_s", lambda_s},
         {"lambda_r", lambda_r}};
  j["eval_rtg"] = std::isnan(eval_rtg) ? Json(nullptr) : Json(eval_rtg);
  return j;
}

TrainerConfig TrainerConfig::defaults_for(Algorithm a) {
  TrainerConfig c;
  c.algorithm = a;
  if (a == Algorithm::kCql) {
    c.actor_hidden = {256, 256, 256};
    c.critic_hidden = {256, 256, 256};
    c.actor_lr = 1e-4;
  }
  if (a == Algorithm::kDt || a == Algorithm::kDtJoint) c.batch_size = 32;
  return c;
}

TrainerConfig TrainerConfig::from_json(const Json& j) {
  TrainerConfig c = defaults_for(parse_algorithm(j.value("algorithm", std::string("td3bc"))));
#define SSORL_READ(field) c.field = j.value(#field, c.field)
  SSORL_READ(budget);
  SSORL_READ(batch_size);
  SSORL_READ(discount);
  SSORL_READ(tau);
  SSORL_READ(log_every);
  SSORL_READ(actor_hidden);
  SSORL_READ(critic_hidden);
  SSORL_READ(actor_lr);
  SSORL_READ(critic_lr);
  SSORL_READ(policy_noise);
  SSORL_READ(noise_clip);
  SSORL_READ(policy_delay);
  SSORL_READ(alpha);
  SSORL_READ(temperature_lr);
  SSORL_READ(init_log_temperature);
  SSORL_READ(min_q_weight);
  SSORL_READ(n_action_samples);
  SSORL_READ(log_std_min);
  SSORL_READ(log_std_max);
  SSORL_READ(context);
  SSORL_READ(layers);
  SSORL_READ(d_model);
  SSORL_READ(heads);
  SSORL_READ(dt_lr);
  SSORL_READ(dt_weight_decay);
  SSORL_READ(dt_temperature_lr);
  SSORL_READ(dt_init_temperature);
  SSORL_READ(grad_clip);
  SSORL_READ(warmup_steps);
  SSORL_READ(lambda_s);
  SSORL_READ(lambda_r);
#undef SSORL_READ
  if (j.contains("eval_rtg") && !j["eval_rtg"].is_null()) c.eval_rtg = j["eval_rtg"].get<double>();
  if (!(c.tau > 0.0 && c.tau <= 1.0)) throw std::invalid_argument("trainer: tau must be in (0, 1]");
  if (c.policy_delay == 0) throw std::invalid_argument("trainer: policy_delay must be >= 1");
  return c;
}

StateNormalizer StateNormalizer::fit(const env::Dataset& dataset) {
  StateNormalizer n;
  const std::size_t d = dataset.state_dim;
  n.mean.assign(d, 0.0);
  n.std.assign(d, 0.0);
  double count = 0.0;
  for (const auto& t : dataset.trajectories) {
    for (std::size_t r = 0; r < t.states.rows(); ++r) {
      for (std::size_t c = 0; c < d; ++c) n.mean[c] += t.states.at(r, c);
      count += 1.0;
    }
  }
  if (count == 0.0) throw std::invalid_argument("StateNormalizer: empty dataset");
  for (double& m : n.mean) m /= count;
  for (const auto& t : dataset.trajectories) {
    for (std::size_t r = 0; r < t.states.rows(); ++r) {
      for (std::size_t c = 0; c < d; ++c) n.std[c] += (t.states.at(r, c) - n.mean[c]) * (t.states.at(r, c) - n.mean[c]);
    }
  }
  for (double& s : n.std) s = std::sqrt(s / count) + 1e-3;
  return n;
}

Tensor StateNormalizer::apply(const Tensor& states) const {
  Tensor out = states;
  const std::size_t d = mean.size();
  if (states.cols() != d) throw std::invalid_argument("StateNormalizer: state width mismatch");
  for (std::size_t r = 0; r < states.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) = (states.at(r, c) - mean[c]) / std[c];
  }
  return out;
}

std::vector<double> StateNormalizer::apply(std::span<const double> state) const {
  if (state.size() != mean.size()) throw std::invalid_argument("StateNormalizer: state width mismatch");
  std::vector<double> out(state.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = (state[c] - mean[c]) / std[c];
  return out;
}

Json StateNormalizer::to_json() const { return Json{{"mean", mean}, {"std", std}}; }

StateNormalizer StateNormalizer::from_json(const Json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
}

void require_actions(const env::Dataset& dataset, const std::string& who) {
  if (dataset.empty()) throw std::invalid_argument(who + ": empty dataset");
  for (const auto& t : dataset.trajectories) {
    if (!t.labelled()) throw std::invalid_argument(who + ": action-free trajectory in training data");
  }
}

TransitionData flatten_transitions(const env::Dataset& dataset, const StateNormalizer& normalizer) {
  require_actions(dataset, "flatten_transitions");
  const std::size_t n = dataset.transition_count();
  const std::size_t sd = dataset.state_dim, ad = dataset.action_dim;
  TransitionData out;
  out.states = Tensor::matrix(n, sd);
  out.actions = Tensor::matrix(n, ad);
  out.rewards = Tensor::matrix(n, 1);
  out.next_states = Tensor::matrix(n, sd);
  out.not_done = Tensor::matrix(n, 1, 1.0);
  std::size_t row = 0;
  for (const auto& t : dataset.trajectories) {
    const Tensor s = normalizer.apply(t.states);
    for (std::size_t i = 0; i < t.length(); ++i, ++row) {
      std::copy_n(s.data() + i * sd, sd, out.states.data() + row * sd);
      std::copy_n(s.data() + (i + 1) * sd, sd, out.next_states.data() + row * sd);
      std::copy_n(t.actions->data() + i * ad, ad, out.actions.data() + row * ad);
      out.rewards[row] = t.rewards[i];
    }
  }
  return out;
}

Tensor concat_tensors_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("concat_tensors_cols: row counts differ");
  const std::size_t ca = a.cols(), cb = b.cols();
  Tensor out = Tensor::matrix(a.rows(), ca + cb);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy_n(a.data() + r * ca, ca, out.data() + r * (ca + cb));
    std::copy_n(b.data() + r * cb, cb, out.data() + r * (ca + cb) + ca);
  }
  return out;
}

Tensor take_rows(const Tensor& t, const std::vector<std::size_t>& rows) {
  const std::size_t w = t.cols();
  Tensor out = Tensor::matrix(rows.size(), w);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(t.data() + rows[i] * w, w, out.data() + i * w);
  return out;
}

TransitionData sample_batch(const TransitionData& data, std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.index(data.size());
  return {take_rows(data.states, rows), take_rows(data.actions, rows), take_rows(data.rewards, rows),
          take_rows(data.next_states, rows), take_rows(data.not_done, rows)};
}

}  // namespace ssorl::orl
