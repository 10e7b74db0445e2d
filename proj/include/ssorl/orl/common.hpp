#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssorl/common/json_util.hpp"
#include "ssorl/common/random.hpp"
#include "ssorl/env/trajectory.hpp"
#include "ssorl/nn/tensor.hpp"

namespace ssorl::orl {

using nn::Tensor;

enum class Algorithm { kTd3bc, kCql, kDt, kDtJoint };

Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm a);

/// Hyperparameters for every trainer; each reads the fields it needs.
struct TrainerConfig {
  Algorithm algorithm = Algorithm::kTd3bc;
  std::size_t budget = 20000;  // gradient steps
  std::size_t batch_size = 256;
  double discount = 0.99;
  double tau = 0.005;
  std::size_t log_every = 500;

  // TD3BC
  std::vector<std::size_t> actor_hidden{256, 256};
  std::vector<std::size_t> critic_hidden{256, 256};
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double policy_noise = 0.2;
  double noise_clip = 0.5;
  std::size_t policy_delay = 2;
  double alpha = 2.5;

  // CQL (actor_hidden / critic_hidden / actor_lr / critic_lr shared)
  double temperature_lr = 3e-4;
  double init_log_temperature = 0.0;
  double min_q_weight = 5.0;
  std::size_t n_action_samples = 10;
  double log_std_min = -5.0;
  double log_std_max = 2.0;

  // DT and DT-Joint
  std::size_t context = 8;
  std::size_t layers = 2;
  std::size_t d_model = 64;
  std::size_t heads = 2;
  double dt_lr = 1e-4;
  double dt_weight_decay = 1e-3;
  double dt_temperature_lr = 1e-4;
  double dt_init_temperature = 0.1;
  double grad_clip = 0.25;
  std::size_t warmup_steps = 0;  // 0 means budget / 10
  double lambda_s = 0.01;
  double lambda_r = 0.1;
  /// Return-to-go target at evaluation; NaN selects the env expert reference.
  double eval_rtg = std::numeric_limits<double>::quiet_NaN();

  Json to_json() const;
  static TrainerConfig from_json(const Json& j);
  static TrainerConfig defaults_for(Algorithm a);
};

/// Per-dimension state standardization fitted on a dataset.
struct StateNormalizer {
  std::vector<double> mean;
  std::vector<double> std;

  static StateNormalizer fit(const env::Dataset& dataset);
  Tensor apply(const Tensor& states) const;
  std::vector<double> apply(std::span<const double> state) const;
  Json to_json() const;
  static StateNormalizer from_json(const Json& j);
};

/// Flat (s, a, r, s', not_done) arrays. Episodes end by time limit, so
/// every transition bootstraps (not_done = 1).
struct TransitionData {
  Tensor states;       // [n, state_dim], normalized
  Tensor actions;      // [n, action_dim]
  Tensor rewards;      // [n, 1]
  Tensor next_states;  // [n, state_dim], normalized
  Tensor not_done;     // [n, 1]
  std::size_t size() const { return rewards.rows(); }
};

/// Throws std::invalid_argument on an action-free trajectory.
void require_actions(const env::Dataset& dataset, const std::string& who);

TransitionData flatten_transitions(const env::Dataset& dataset, const StateNormalizer& normalizer);

/// Uniform sample with replacement.
TransitionData sample_batch(const TransitionData& data, std::size_t n, Rng& rng);

/// [a | b] for tensors with equal row counts.
Tensor concat_tensors_cols(const Tensor& a, const Tensor& b);

/// Rows selected from a [n, d] tensor.
Tensor take_rows(const Tensor& t, const std::vector<std::size_t>& rows);

}  // namespace ssorl::orl
