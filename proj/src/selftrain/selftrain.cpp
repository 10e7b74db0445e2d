#include "ssorl/selftrain/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ssorl/common/random.hpp"
#include "ssorl/data/split.hpp"

namespace ssorl::selftrain {

using nn::Tensor;

IdmEnsemble::IdmEnsemble(std::vector<idm::IdmModel> members) : members_(std::move(members)) {
  for (const auto& m : members_) {
    const auto& a = m.config().window;
    const auto& b = members_.front().config().window;
    if (a.k != b.k || a.symmetric != b.symmetric || m.state_dim() != members_.front().state_dim() ||
        m.action_dim() != members_.front().action_dim()) {
      throw std::invalid_argument("IdmEnsemble: members disagree on window shape or dimensions");
    }
  }
}

std::pair<Tensor, Tensor> IdmEnsemble::mixture(const Tensor& raw_inputs) const {
  if (members_.empty()) throw std::invalid_argument("mixture_uncertainty: empty ensemble");
  const double m = static_cast<double>(members_.size());
  std::vector<std::pair<Tensor, Tensor>> preds;
  preds.reserve(members_.size());
  for (const auto& member : members_) preds.push_back(member.predict(raw_inputs));
  Tensor mean(preds.front().first.shape(), 0.0), var(preds.front().first.shape(), 0.0);
  for (const auto& [mu, v] : preds) {
    for (std::size_t i = 0; i < mean.size(); ++i) {
      mean[i] += mu[i] / m;
      var[i] += v[i] / m;
    }
  }
  for (const auto& [mu, v] : preds) {
    for (std::size_t i = 0; i < mean.size(); ++i) var[i] += (mu[i] - mean[i]) * (mu[i] - mean[i]) / m;
  }
  return {std::move(mean), std::move(var)};
}

std::vector<double> mixture_variance(std::span<const std::vector<double>> means,
                                     std::span<const std::vector<double>> variances) {
  if (means.empty() || means.size() != variances.size()) throw std::invalid_argument("mixture_variance: empty ensemble");
  const std::size_t d = means.front().size();
  const double m = static_cast<double>(means.size());
  std::vector<double> mu(d, 0.0), out(d, 0.0);
  for (std::size_t j = 0; j < means.size(); ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      mu[i] += means[j][i] / m;
      out[i] += variances[j][i] / m;
    }
  }
  for (std::size_t j = 0; j < means.size(); ++j) {
    for (std::size_t i = 0; i < d; ++i) out[i] += (means[j][i] - mu[i]) * (means[j][i] - mu[i]) / m;
  }
  return out;
}

double reduce_uncertainty(std::span<const double> per_dim, Reduction reduction) {
  if (per_dim.empty()) throw std::invalid_argument("reduce_uncertainty: no dimensions");
  if (reduction == Reduction::kMax) return *std::max_element(per_dim.begin(), per_dim.end());
  return std::accumulate(per_dim.begin(), per_dim.end(), 0.0) / static_cast<double>(per_dim.size());
}

std::vector<double> mixture_uncertainty(const IdmEnsemble& ensemble, const Tensor& raw_inputs, Reduction reduction) {
  const auto [mean, var] = ensemble.mixture(raw_inputs);
  std::vector<double> nu(var.rows());
  for (std::size_t r = 0; r < var.rows(); ++r) nu[r] = reduce_uncertainty(var.row_span(r), reduction);
  return nu;
}

double mixture_uncertainty(const IdmEnsemble& ensemble, std::span<const double> window, Reduction reduction) {
  return mixture_uncertainty(ensemble, Tensor::row(window), reduction).front();
}

std::vector<std::size_t> augmentation_schedule(std::size_t n_unlabelled, std::size_t rounds) {
  if (rounds == 0) throw std::invalid_argument("self_train: rounds must be >= 1");
  const std::size_t per = n_unlabelled / rounds;
  if (per == 0) {
    throw std::invalid_argument("self_train: n_aug = 0 (" + std::to_string(n_unlabelled) + " unlabelled windows over " +
                                std::to_string(rounds) + " rounds)");
  }
  std::vector<std::size_t> out(rounds, per);
  out.back() += n_unlabelled - per * rounds;
  return out;
}

std::vector<std::size_t> lowest_uncertainty(std::span<const double> nu, std::size_t count) {
  std::vector<std::size_t> idx(nu.size());
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t a, std::size_t b) { return nu[a] != nu[b] ? nu[a] < nu[b] : a < b; });
  idx.resize(count);
  return idx;
}

Json SelfTrainConfig::to_json() const {
  return Json{{"idm", idm.to_json()},
              {"members", members},
              {"rounds", rounds},
              {"reduction", reduction == Reduction::kMean ? "mean" : "max"},
              {"relabel_with_final", relabel_with_final}};
}

SelfTrainConfig SelfTrainConfig::from_json(const Json& j) {
  SelfTrainConfig c;
  if (j.contains("idm")) c.idm = idm::IdmConfig::from_json(j["idm"]);
  c.members = j.value("members", c.members);
  c.rounds = j.value("rounds", c.rounds);
  const auto red = j.value("reduction", std::string("mean"));
  if (red != "mean" && red != "max") throw std::invalid_argument("self-training reduction must be 'mean' or 'max'");
  c.reduction = red == "mean" ? Reduction::kMean : Reduction::kMax;
  c.relabel_with_final = j.value("relabel_with_final", c.relabel_with_final);
  return c;
}

namespace {

Json quantiles(std::vector<double> v) {
  if (v.empty()) return nullptr;
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return Json{{"min", v.front()}, {"q25", q(0.25)}, {"median", q(0.5)}, {"q75", q(0.75)}, {"max", v.back()}};
}

IdmEnsemble fit_ensemble(const data::WindowMatrix& train, const SelfTrainConfig& config, std::size_t state_dim,
                         std::size_t action_dim, std::uint64_t seed, std::size_t round, Json& val_nlls) {
  std::vector<idm::IdmModel> members;
  val_nlls = Json::array();
  for (std::size_t j = 0; j < config.members; ++j) {
    const std::uint64_t member_seed = derive_seed(seed, round * 1000 + j);
    const auto split = data::train_val_split(train.size(), config.idm.val_frac, member_seed);
    auto model = idm::fit_idm(train.select(split.train), train.select(split.val), config.idm, state_dim, action_dim,
                              member_seed);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : model.validation_curve()) best = std::min(best, p.val_nll);
    val_nlls.push_back(best);
    members.push_back(std::move(model));
  }
  return IdmEnsemble(std::move(members));
}

}  // namespace

SelfTrainResult self_train(const data::WindowMatrix& labelled, const data::WindowMatrix& unlabelled,
                           const SelfTrainConfig& config, std::size_t state_dim, std::size_t action_dim,
                           std::uint64_t seed) {
  if (config.members < 2) throw std::invalid_argument("self_train: ensemble size must be >= 2");
  if (!labelled.has_targets() || labelled.size() == 0) throw std::invalid_argument("self_train: no labelled windows");
  const auto schedule = augmentation_schedule(unlabelled.size(), config.rounds);

  SelfTrainResult result;
  data::WindowMatrix train = labelled;
  std::vector<std::size_t> pool(unlabelled.size());
  std::iota(pool.begin(), pool.end(), 0);
  Tensor graduated = Tensor::matrix(unlabelled.size(), action_dim);

  Json val_nlls;
  result.ensemble = fit_ensemble(train, config, state_dim, action_dim, seed, 0, val_nlls);
  result.log.push_back({{"round", 0},
                        {"train_size", train.size()},
                        {"unlabelled_size", pool.size()},
                        {"moved", 0},
                        {"val_nll", val_nlls}});

  for (std::size_t round = 1; round <= config.rounds; ++round) {
    const auto remaining = unlabelled.select(pool);
    const auto [mix_mean, mix_var] = result.ensemble.mixture(remaining.inputs);
    std::vector<double> nu(pool.size());
    for (std::size_t r = 0; r < pool.size(); ++r) nu[r] = reduce_uncertainty(mix_var.row_span(r), config.reduction);
    const std::size_t n_aug = schedule[round - 1];
    const auto chosen = lowest_uncertainty(nu, n_aug);

    data::WindowMatrix moved = remaining.select(chosen);
    moved.targets = Tensor::matrix(chosen.size(), action_dim);
    std::vector<bool> taken(pool.size(), false);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      taken[chosen[i]] = true;
      const auto src = mix_mean.row_span(chosen[i]);
      std::copy(src.begin(), src.end(), moved.targets.row_span(i).begin());
      std::copy(src.begin(), src.end(), graduated.row_span(pool[chosen[i]]).begin());
    }
    std::vector<std::size_t> next_pool;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!taken[i]) next_pool.push_back(pool[i]);
    }
    pool = std::move(next_pool);
    train = data::WindowMatrix::concat(train, moved);

    result.ensemble = fit_ensemble(train, config, state_dim, action_dim, seed, round, val_nlls);
    result.log.push_back({{"round", round},
                          {"train_size", train.size()},
                          {"unlabelled_size", pool.size()},
                          {"moved", chosen.size()},
                          {"val_nll", val_nlls},
                          {"uncertainty", quantiles(nu)},
                          {"max_selected_uncertainty", chosen.empty() ? 0.0 : nu[chosen.back()]}});
  }

  if (config.relabel_with_final && unlabelled.size() > 0) {
    result.proxy_actions = result.ensemble.mixture(unlabelled.inputs).first;
  } else {
    result.proxy_actions = std::move(graduated);
  }
  return result;
}

env::Dataset apply_proxy_actions(const env::Dataset& unlabelled, const data::WindowMatrix& windows,
                                 const Tensor& actions, double action_low, double action_high) {
  env::Dataset out = unlabelled;
  for (auto& t : out.trajectories) {
    if (t.labelled()) throw std::invalid_argument("proxy_label: trajectory already carries actions");
    t.actions = Tensor::matrix(t.length(), out.action_dim);
  }
  if (actions.rows() != windows.size()) throw std::invalid_argument("apply_proxy_actions: row count mismatch");
  for (std::size_t r = 0; r < windows.size(); ++r) {
    auto dst = out.trajectories.at(windows.trajectory[r]).actions->row_span(windows.t[r]);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = std::clamp(actions.at(r, c), action_low, action_high);
  }
  return out;
}

env::Dataset proxy_label_ensemble(const IdmEnsemble& ensemble, const env::Dataset& unlabelled, double action_low,
                                  double action_high) {
  if (ensemble.empty()) throw std::invalid_argument("proxy_label_ensemble: empty ensemble");
  for (const auto& t : unlabelled.trajectories) {
    if (t.labelled()) throw std::invalid_argument("proxy_label: trajectory already carries actions");
  }
  if (unlabelled.empty()) return unlabelled;
  const auto windows = data::window_matrix(unlabelled.trajectories, ensemble.member(0).config().window,
                                           ensemble.member(0).action_dim());
  return apply_proxy_actions(unlabelled, windows, ensemble.mixture(windows.inputs).first, action_low, action_high);
}

}  // namespace ssorl::selftrain
