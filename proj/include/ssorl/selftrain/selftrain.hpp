#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssorl/data/windows.hpp"
#include "ssorl/idm/idm.hpp"

namespace ssorl::selftrain {

enum class Reduction { kMean, kMax };

/// m inverse dynamics models sharing (k, symmetric) and dimensions.
class IdmEnsemble {
 public:
  IdmEnsemble() = default;
  explicit IdmEnsemble(std::vector<idm::IdmModel> members);

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<idm::IdmModel>& members() const { return members_; }
  const idm::IdmModel& member(std::size_t i) const { return members_.at(i); }

  /// Gaussian-mixture moments per window: mean of member means, and mean of
  /// member variances plus variance of member means. Each [n, action_dim].
  std::pair<nn::Tensor, nn::Tensor> mixture(const nn::Tensor& raw_inputs) const;

 private:
  std::vector<idm::IdmModel> members_;
};

/// Mixture variance per action dimension (law of total variance) from member
/// means and variances.
std::vector<double> mixture_variance(std::span<const std::vector<double>> means,
                                     std::span<const std::vector<double>> variances);
/// Scalar uncertainty: mean (or max) of the per-dimension mixture variance.
double reduce_uncertainty(std::span<const double> per_dim, Reduction reduction);

/// nu_t for one flattened window.
double mixture_uncertainty(const IdmEnsemble& ensemble, std::span<const double> window,
                           Reduction reduction = Reduction::kMean);
/// nu_t for every row of `raw_inputs`.
std::vector<double> mixture_uncertainty(const IdmEnsemble& ensemble, const nn::Tensor& raw_inputs,
                                        Reduction reduction = Reduction::kMean);

/// Per-round sizes: floor(n / rounds), the remainder added to the last.
std::vector<std::size_t> augmentation_schedule(std::size_t n_unlabelled, std::size_t rounds);

/// Indices of the `count` smallest values, ties broken by index, in
/// ascending (value, index) order.
std::vector<std::size_t> lowest_uncertainty(std::span<const double> nu, std::size_t count);

struct SelfTrainConfig {
  idm::IdmConfig idm;
  std::size_t members = 2;
  std::size_t rounds = 3;
  Reduction reduction = Reduction::kMean;
  /// Final labels from the last ensemble for every unlabelled window
  /// (default) instead of the labels assigned at graduation.
  bool relabel_with_final = true;

  Json to_json() const;
  static SelfTrainConfig from_json(const Json& j);
};

struct SelfTrainResult {
  IdmEnsemble ensemble;
  /// Unlabelled windows in input order with their proxy actions.
  nn::Tensor proxy_actions;
  /// Per round: pool sizes, validation NLLs, uncertainty quantiles.
  Json log = Json::array();
};

/// Ensemble self-training: fit m members on the labelled windows; then each
/// round move the n_aug least-uncertain unlabelled windows, labelled with
/// the mixture mean, into the training set and refit. Each fit holds out
/// val_frac of the current training windows for best-validation selection.
SelfTrainResult self_train(const data::WindowMatrix& labelled, const data::WindowMatrix& unlabelled,
                           const SelfTrainConfig& config, std::size_t state_dim, std::size_t action_dim,
                           std::uint64_t seed);

/// Proxy-labels action-free trajectories with the ensemble mixture mean
/// (clamped to the action bounds).
env::Dataset proxy_label_ensemble(const IdmEnsemble& ensemble, const env::Dataset& unlabelled,
                                  double action_low = -1.0, double action_high = 1.0);

/// Writes self-training proxy actions back into the action-free trajectories
/// the unlabelled windows were extracted from.
env::Dataset apply_proxy_actions(const env::Dataset& unlabelled, const data::WindowMatrix& windows,
                                 const nn::Tensor& actions, double action_low = -1.0, double action_high = 1.0);

}  // namespace ssorl::selftrain
