#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssorl/data/windows.hpp"
#include "ssorl/env/trajectory.hpp"
#include "ssorl/nn/autodiff.hpp"
#include "ssorl/nn/layers.hpp"
#include "ssorl/nn/optim.hpp"
#include "ssorl/nn/param_set.hpp"

namespace ssorl::idm {

enum class IdmLoss { kNll, kMse };

struct IdmConfig {
  data::WindowSpec window;
  std::vector<std::size_t> hidden{256, 256};
  nn::Activation activation = nn::Activation::kRelu;
  IdmLoss loss = IdmLoss::kNll;
  /// Freeze the variance head at unit variance (log-variance 0).
  bool fixed_variance = false;
  double logvar_min = -10.0;
  double logvar_max = 4.0;
  std::size_t budget = 20000;  // optimizer steps
  std::size_t eval_every = 500;
  std::size_t batch_size = 256;
  nn::AdamConfig adam{};
  std::size_t warmup_steps = 0;
  double val_frac = 0.1;

  Json to_json() const;
  static IdmConfig from_json(const Json& j);
};

/// Predicted action distribution: diagonal Gaussian.
struct GaussianAction {
  std::vector<double> mean;
  std::vector<double> variance;
};

struct ValidationPoint {
  std::size_t iteration = 0;
  double train_loss = 0.0;
  double val_nll = 0.0;
};

/// Stochastic multi-transition inverse dynamics model. Two independent MLPs
/// map the standardized, flattened window to the action mean and the
/// log-variance.
class IdmModel {
 public:
  IdmModel() = default;
  IdmModel(IdmConfig config, std::size_t state_dim, std::size_t action_dim, std::uint64_t seed);

  const IdmConfig& config() const { return config_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  std::size_t input_dim() const { return config_.window.length() * state_dim_; }

  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }
  const nn::Mlp& mean_net() const { return mean_net_; }
  const nn::Mlp& logvar_net() const { return logvar_net_; }

  /// Input standardization. Zero-spread dimensions get unit scale.
  void fit_normalizer(const nn::Tensor& inputs);
  void set_normalizer(std::vector<double> mean, std::vector<double> std);
  const std::vector<double>& input_mean() const { return input_mean_; }
  const std::vector<double>& input_std() const { return input_std_; }
  nn::Tensor normalize(const nn::Tensor& raw_inputs) const;

  struct Heads {
    nn::Var mean;
    nn::Var logvar;  // clamped
  };
  /// Graph forward pass on raw (unstandardized) inputs [n, input_dim].
  Heads forward(nn::Graph& g, const nn::Tensor& raw_inputs);

  /// Batched prediction: mean and variance, each [n, action_dim].
  std::pair<nn::Tensor, nn::Tensor> predict(const nn::Tensor& raw_inputs) const;
  /// Single flattened window (length * state_dim values).
  GaussianAction predict_action(std::span<const double> window) const;
  GaussianAction predict_action(const data::TransitionWindow& window) const;

  std::vector<ValidationPoint>& validation_curve() { return curve_; }
  const std::vector<ValidationPoint>& validation_curve() const { return curve_; }
  std::size_t best_iteration() const { return best_iteration_; }
  void set_best_iteration(std::size_t it) { best_iteration_ = it; }

  /// Non-parameter state (config, dims, normalizer, curve) as JSON.
  Json metadata() const;
  static IdmModel from_metadata(const Json& meta, nn::ParamSet params);

 private:
  void check_inputs(const nn::Tensor& raw_inputs) const;

  IdmConfig config_;
  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
  nn::ParamSet params_;
  nn::Mlp mean_net_;
  nn::Mlp logvar_net_;
  std::vector<double> input_mean_;
  std::vector<double> input_std_;
  std::vector<ValidationPoint> curve_;
  std::size_t best_iteration_ = 0;
};

/// Mean over the batch of -log N(target; mu, diag(var)), summed over action
/// dimensions.
nn::Var idm_nll(nn::Graph& g, IdmModel& model, const nn::Tensor& raw_inputs, const nn::Tensor& targets);
/// Mean over the batch of the squared error summed over action dimensions.
nn::Var idm_mse(nn::Graph& g, IdmModel& model, const nn::Tensor& raw_inputs, const nn::Tensor& targets);

/// Loss value without gradient bookkeeping.
double idm_nll_value(const IdmModel& model, const nn::Tensor& raw_inputs, const nn::Tensor& targets);
double action_mse(const IdmModel& model, const nn::Tensor& raw_inputs, const nn::Tensor& targets);

/// Trains on `train`, selecting the snapshot with the lowest validation NLL
/// over checks every eval_every steps and at the end of the budget.
/// Throws on budget 0 and on a non-finite loss (naming the iteration).
IdmModel fit_idm(const data::WindowMatrix& train, const data::WindowMatrix& val, const IdmConfig& config,
                 std::size_t state_dim, std::size_t action_dim, std::uint64_t seed);

/// Splits `labelled` into training and validation trajectories
/// (val_frac of them) and runs fit_idm.
IdmModel train_idm(const env::Dataset& labelled, const IdmConfig& config, std::uint64_t seed);

/// Fills every step of each action-free trajectory with the predicted mean,
/// clamped to [action_low, action_high]. Throws on labelled input.
env::Dataset proxy_label(const IdmModel& model, const env::Dataset& unlabelled, double action_low = -1.0,
                         double action_high = 1.0);

}  // namespace ssorl::idm
