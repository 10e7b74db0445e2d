#pragma once

#include <cstdint>
#include <vector>

#include "ssorl/nn/autodiff.hpp"
#include "ssorl/nn/layers.hpp"
#include "ssorl/orl/agent.hpp"

namespace ssorl::orl {

struct SequenceModelSpec {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::size_t context = 8;  // K timesteps, 3K tokens
  std::size_t layers = 2;
  std::size_t d_model = 64;
  std::size_t heads = 2;
  std::size_t max_timestep = 1000;
  /// DT-Joint: linear next-state and reward heads on the action tokens.
  bool joint_heads = false;
  double log_std_min = -5.0;
  double log_std_max = 2.0;

  Json to_json() const;
  static SequenceModelSpec from_json(const Json& j);
};

/// Timesteps-major batch of B windows of T steps; row b*T + t is step t of
/// window b.
struct SequenceBatch {
  std::size_t batch = 0;
  std::size_t seq = 0;
  Tensor rtg;          // [B*T, 1], scaled
  Tensor states;       // [B*T, state_dim], normalized
  Tensor actions;      // [B*T, action_dim], zeros where missing
  Tensor labelled;     // [B*T, 1], 1 where the action is known
  Tensor next_states;  // [B*T, state_dim], normalized
  Tensor rewards;      // [B*T, 1]
  std::vector<std::size_t> timesteps;
};

/// Causal transformer over interleaved (return-to-go, state, action) tokens
/// with a diagonal Gaussian action head read at each state token.
class SequenceModel {
 public:
  SequenceModel() = default;
  SequenceModel(SequenceModelSpec spec, std::uint64_t seed);
  SequenceModel(SequenceModelSpec spec, nn::ParamSet params);

  const SequenceModelSpec& spec() const { return spec_; }
  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  struct Output {
    nn::Var mean;     // [B*T, action_dim], tanh-bounded
    nn::Var log_std;  // [B*T, action_dim], clamped
    nn::Var state_pred;
    nn::Var reward_pred;
  };
  Output forward(nn::Graph& g, const SequenceBatch& batch);

  /// Names of the action-head parameters.
  static std::vector<std::string> action_head_names();

 private:
  nn::AttentionBlockConfig block_config() const;

  SequenceModelSpec spec_;
  nn::ParamSet params_;
};

struct DtLossTerms {
  double action_nll = 0.0;  // mean over labelled tokens
  double entropy = 0.0;     // mean over labelled tokens
  double state_mse = 0.0;   // mean over all tokens
  double reward_mse = 0.0;
  double objective = 0.0;
  double labelled_tokens = 0.0;
};

/// action_nll - alpha * entropy (labelled tokens only) + lambda_s * state
/// error + lambda_r * reward error (all tokens, joint heads only). `alpha`
/// enters as a constant.
nn::Var dt_objective(nn::Graph& g, SequenceModel& model, const SequenceBatch& batch, double alpha, double lambda_s,
                     double lambda_r, DtLossTerms* terms = nullptr);

/// exp(log_alpha) * (entropy - target_entropy), entropy held constant.
nn::Var dt_temperature_loss(nn::Graph& g, nn::ParamSet& temperature, double entropy, double target_entropy);

/// Per-trajectory arrays the sampler slices windows from.
struct SequenceData {
  struct Item {
    Tensor states;   // [T+1, state_dim], normalized
    Tensor actions;  // [T, action_dim], zeros when unlabelled
    std::vector<double> rtg;  // scaled
    std::vector<double> rewards;
    bool labelled = true;
  };
  std::vector<Item> items;
  std::size_t min_length = 0;
  std::size_t max_length = 0;
};

/// Return-to-go scale: max |g_1| over the dataset (at least 1).
double rtg_scale_for(const env::Dataset& dataset);

SequenceData make_sequence_data(const env::Dataset& dataset, const StateNormalizer& normalizer, double rtg_scale);

/// B windows of length `seq`; trajectory uniform, start uniform.
SequenceBatch sample_sequences(const SequenceData& data, std::size_t batch, std::size_t seq, Rng& rng);

TrainedAgent train_dt(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed);

/// Labelled trajectories train every head; unlabelled ones enter with zero
/// action tokens and train only the state and reward heads.
TrainedAgent train_dt_joint(const env::Dataset& labelled, const env::Dataset& unlabelled, const TrainerConfig& config,
                            std::uint64_t seed);

/// Rebuilds the evaluation policy of a DT-family agent.
std::unique_ptr<env::Policy> make_dt_policy(const TrainedAgent& agent, double target_return);

}  // namespace ssorl::orl
