#include "ssorl/idm/idm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ssorl/common/random.hpp"
#include "ssorl/data/split.hpp"

namespace ssorl::idm {

using nn::Graph;
using nn::Tensor;
using nn::Var;

Json IdmConfig::to_json() const {
  return Json{{"k", window.k},
              {"symmetric", window.symmetric},
              {"padding", data::padding_name(window.padding)},
              {"hidden", hidden},
              {"activation", std::string(nn::activation_name(activation))},
              {"loss", loss == IdmLoss::kNll ? "nll" : "mse"},
              {"fixed_variance", fixed_variance},
              {"logvar_min", logvar_min},
              {"logvar_max", logvar_max},
              {"budget", budget},
              {"eval_every", eval_every},
              {"batch_size", batch_size},
              {"lr", adam.lr},
              {"weight_decay", adam.weight_decay},
              {"warmup_steps", warmup_steps},
              {"val_frac", val_frac}};
}

IdmConfig IdmConfig::from_json(const Json& j) {
  IdmConfig c;
  c.window.k = j.value("k", c.window.k);
  c.window.symmetric = j.value("symmetric", c.window.symmetric);
  c.window.padding = data::parse_padding(j.value("padding", std::string("repeat")));
  c.hidden = j.value("hidden", c.hidden);
  c.activation = nn::parse_activation(j.value("activation", std::string("relu")));
  const auto loss = j.value("loss", std::string("nll"));
  if (loss != "nll" && loss != "mse") throw std::invalid_argument("idm loss must be 'nll' or 'mse'");
  c.loss = loss == "nll" ? IdmLoss::kNll : IdmLoss::kMse;
  c.fixed_variance = j.value("fixed_variance", c.fixed_variance);
  c.logvar_min = j.value("logvar_min", c.logvar_min);
  c.logvar_max = j.value("logvar_max", c.logvar_max);
  c.budget = j.value("budget", c.budget);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.adam.lr = j.value("lr", c.adam.lr);
  c.adam.weight_decay = j.value("weight_decay", c.adam.weight_decay);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.val_frac = j.value("val_frac", c.val_frac);
  return c;
}

namespace {

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

IdmModel::IdmModel(IdmConfig config, std::size_t state_dim, std::size_t action_dim, std::uint64_t seed)
    : config_(std::move(config)), state_dim_(state_dim), action_dim_(action_dim) {
  if (state_dim == 0 || action_dim == 0) throw std::invalid_argument("IdmModel: dimensions must be positive");
  const std::size_t in = input_dim();
  mean_net_ = nn::Mlp("mean", layer_sizes(in, config_.hidden, action_dim), config_.activation);
  logvar_net_ = nn::Mlp("logvar", layer_sizes(in, config_.hidden, action_dim), config_.activation);
  Rng rng(derive_seed(seed, 0x1d0));
  mean_net_.init(params_, rng);
  if (!config_.fixed_variance) logvar_net_.init(params_, rng);
  input_mean_.assign(in, 0.0);
  input_std_.assign(in, 1.0);
}

void IdmModel::fit_normalizer(const Tensor& inputs) {
  check_inputs(inputs);
  const std::size_t n = inputs.rows(), d = inputs.cols();
  if (n == 0) throw std::invalid_argument("fit_normalizer: no inputs");
  input_mean_.assign(d, 0.0);
  input_std_.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) input_mean_[c] += inputs.at(r, c);
  }
  for (double& m : input_mean_) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = inputs.at(r, c) - input_mean_[c];
      input_std_[c] += dv * dv;
    }
  }
  for (double& s : input_std_) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s < 1e-8) s = 1.0;
  }
}

void IdmModel::set_normalizer(std::vector<double> mean, std::vector<double> std) {
  if (mean.size() != input_dim() || std.size() != input_dim()) throw std::invalid_argument("set_normalizer: wrong size");
  input_mean_ = std::move(mean);
  input_std_ = std::move(std);
}

void IdmModel::check_inputs(const Tensor& raw) const {
  if (raw.cols() != input_dim()) {
    throw std::invalid_argument("IdmModel: window has " + std::to_string(raw.cols()) + " values, model expects " +
                                std::to_string(input_dim()) + " (k=" + std::to_string(config_.window.k) +
                                (config_.window.symmetric ? ", symmetric)" : ")"));
  }
}

Tensor IdmModel::normalize(const Tensor& raw) const {
  check_inputs(raw);
  Tensor out = raw;
  const std::size_t d = raw.cols();
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) = (raw.at(r, c) - input_mean_[c]) / input_std_[c];
  }
  return out;
}

IdmModel::Heads IdmModel::forward(Graph& g, const Tensor& raw_inputs) {
  Var x = g.constant(normalize(raw_inputs));
  Heads h;
  h.mean = mean_net_.forward(g, params_, x);
  if (config_.fixed_variance) {
    h.logvar = g.constant(Tensor::matrix(raw_inputs.rows(), action_dim_, 0.0));
  } else {
    h.logvar = nn::clamp(logvar_net_.forward(g, params_, x), config_.logvar_min, config_.logvar_max);
  }
  return h;
}

std::pair<Tensor, Tensor> IdmModel::predict(const Tensor& raw_inputs) const {
  const Tensor x = normalize(raw_inputs);
  Tensor mean = mean_net_.evaluate(params_, x);
  Tensor var;
  if (config_.fixed_variance) {
    var = Tensor::matrix(raw_inputs.rows(), action_dim_, 1.0);
  } else {
    var = logvar_net_.evaluate(params_, x);
    for (double& v : var.storage()) v = std::exp(std::clamp(v, config_.logvar_min, config_.logvar_max));
  }
  return {std::move(mean), std::move(var)};
}

GaussianAction IdmModel::predict_action(std::span<const double> window) const {
  auto [mean, var] = predict(Tensor::row(window));
  return {mean.storage(), var.storage()};
}

GaussianAction IdmModel::predict_action(const data::TransitionWindow& window) const {
  if (window.states.rows() != config_.window.length() || window.states.cols() != state_dim_) {
    throw std::invalid_argument("predict_action: window shape " + window.states.shape_string() + " does not match model [" +
                                std::to_string(config_.window.length()) + ", " + std::to_string(state_dim_) + "]");
  }
  return predict_action(window.states.values());
}

Json IdmModel::metadata() const {
  Json curve = Json::array();
  for (const auto& p : curve_) curve.push_back({{"iteration", p.iteration}, {"train_loss", p.train_loss}, {"val_nll", p.val_nll}});
  return Json{{"kind", "idm"},
              {"config", config_.to_json()},
              {"state_dim", state_dim_},
              {"action_dim", action_dim_},
              {"input_mean", input_mean_},
              {"input_std", input_std_},
              {"best_iteration", best_iteration_},
              {"validation_curve", curve}};
}

IdmModel IdmModel::from_metadata(const Json& meta, nn::ParamSet params) {
  IdmModel m(IdmConfig::from_json(meta.at("config")), meta.at("state_dim").get<std::size_t>(),
             meta.at("action_dim").get<std::size_t>(), 0);
  if (params.names() != m.params_.names()) throw std::invalid_argument("IdmModel: checkpoint parameters do not match config");
  m.params_.copy_values_from(params);
  m.set_normalizer(meta.at("input_mean").get<std::vector<double>>(), meta.at("input_std").get<std::vector<double>>());
  m.best_iteration_ = meta.value("best_iteration", std::size_t{0});
  for (const auto& p : meta.value("validation_curve", Json::array())) {
    m.curve_.push_back({p.at("iteration").get<std::size_t>(), p.at("train_loss").get<double>(), p.at("val_nll").get<double>()});
  }
  return m;
}

namespace {

void check_targets(const IdmModel& model, const Tensor& raw_inputs, const Tensor& targets) {
  if (targets.empty()) throw std::invalid_argument("idm loss: windows carry no target actions");
  if (targets.rows() != raw_inputs.rows() || targets.cols() != model.action_dim()) {
    throw std::invalid_argument("idm loss: targets " + targets.shape_string() + " do not match inputs");
  }
}

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

Var idm_nll(Graph& g, IdmModel& model, const Tensor& raw_inputs, const Tensor& targets) {
  check_targets(model, raw_inputs, targets);
  auto h = model.forward(g, raw_inputs);
  Var diff = g.constant(targets) - h.mean;
  Var per_dim = 0.5 * h.logvar + 0.5 * square(diff) * exp(-h.logvar);
  const double constant = kHalfLog2Pi * static_cast<double>(model.action_dim());
  return mean(sum_rows(per_dim)) + constant;
}

Var idm_mse(Graph& g, IdmModel& model, const Tensor& raw_inputs, const Tensor& targets) {
  check_targets(model, raw_inputs, targets);
  auto h = model.forward(g, raw_inputs);
  return mean(sum_rows(square(g.constant(targets) - h.mean)));
}

double idm_nll_value(const IdmModel& model, const Tensor& raw_inputs, const Tensor& targets) {
  check_targets(model, raw_inputs, targets);
  auto [mu, var] = model.predict(raw_inputs);
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = targets[i] - mu[i];
    total += kHalfLog2Pi + 0.5 * std::log(var[i]) + 0.5 * d * d / var[i];
  }
  return total / static_cast<double>(raw_inputs.rows());
}

double action_mse(const IdmModel& model, const Tensor& raw_inputs, const Tensor& targets) {
  check_targets(model, raw_inputs, targets);
  auto [mu, var] = model.predict(raw_inputs);
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) total += (targets[i] - mu[i]) * (targets[i] - mu[i]);
  return total / static_cast<double>(mu.size());
}

IdmModel fit_idm(const data::WindowMatrix& train, const data::WindowMatrix& val, const IdmConfig& config,
                 std::size_t state_dim, std::size_t action_dim, std::uint64_t seed) {
  if (config.budget == 0) throw std::invalid_argument("train_idm: iteration budget must be positive");
  if (train.size() == 0 || !train.has_targets()) throw std::invalid_argument("train_idm: no labelled training windows");
  if (val.size() == 0 || !val.has_targets()) throw std::invalid_argument("train_idm: no labelled validation windows");
  IdmModel model(config, state_dim, action_dim, seed);
  model.fit_normalizer(train.inputs);

  const std::size_t n = train.size();
  const std::size_t batch = std::min(config.batch_size, n);
  const std::size_t width = train.inputs.cols();
  Rng rng(derive_seed(seed, 0xba7c));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::size_t cursor = 0;

  nn::ParamSet best = model.params();
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_it = 0;
  nn::LinearWarmup warmup{config.warmup_steps};
  Tensor xb = Tensor::matrix(batch, width), yb = Tensor::matrix(batch, action_dim);
  double last_loss = 0.0;
  const std::size_t eval_every = std::max<std::size_t>(1, config.eval_every);

  for (std::size_t it = 1; it <= config.budget; ++it) {
    // Epoch-style sampling: walk a shuffled permutation, reshuffling at the end.
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == n) {
        rng.shuffle(perm);
        cursor = 0;
      }
      const std::size_t r = perm[cursor++];
      std::copy_n(train.inputs.data() + r * width, width, xb.data() + b * width);
      std::copy_n(train.targets.data() + r * action_dim, action_dim, yb.data() + b * action_dim);
    }
    Graph g;
    Var loss = config.loss == IdmLoss::kNll ? idm_nll(g, model, xb, yb) : idm_mse(g, model, xb, yb);
    last_loss = loss.value().item();
    if (!std::isfinite(last_loss)) {
      throw std::runtime_error("train_idm: non-finite loss at iteration " + std::to_string(it));
    }
    g.backward(loss);
    nn::adam_step(model.params(), g.gradients(model.params()), config.adam,
                  config.warmup_steps ? warmup.factor(it - 1) : 1.0);

    if (it % eval_every == 0 || it == config.budget) {
      const double v = idm_nll_value(model, val.inputs, val.targets);
      if (!std::isfinite(v)) throw std::runtime_error("train_idm: non-finite validation loss at iteration " + std::to_string(it));
      model.validation_curve().push_back({it, last_loss, v});
      if (v < best_val) {
        best_val = v;
        best_it = it;
        best.copy_values_from(model.params());
      }
    }
  }
  model.params().copy_values_from(best);
  model.params().reset_optimizer_state();
  model.set_best_iteration(best_it);
  return model;
}

IdmModel train_idm(const env::Dataset& labelled, const IdmConfig& config, std::uint64_t seed) {
  if (labelled.empty()) throw std::invalid_argument("train_idm: labelled dataset is empty");
  const auto split = data::train_val_split(labelled.size(), config.val_frac, derive_seed(seed, 0x5a1));
  const auto train = data::subset(labelled, split.train);
  const auto val = data::subset(labelled, split.val);
  const auto wtrain = data::window_matrix(train.trajectories, config.window, labelled.action_dim);
  const auto wval = data::window_matrix(val.trajectories, config.window, labelled.action_dim);
  if (!wtrain.has_targets() || !wval.has_targets()) throw std::invalid_argument("train_idm: trajectories lack actions");
  return fit_idm(wtrain, wval, config, labelled.state_dim, labelled.action_dim, seed);
}

env::Dataset proxy_label(const IdmModel& model, const env::Dataset& unlabelled, double action_low, double action_high) {
  env::Dataset out = unlabelled;
  for (auto& traj : out.trajectories) {
    if (traj.labelled()) throw std::invalid_argument("proxy_label: trajectory already carries actions");
  }
  if (out.empty()) return out;
  const auto windows = data::window_matrix(out.trajectories, model.config().window, model.action_dim());
  const auto [mean, var] = model.predict(windows.inputs);
  for (auto& traj : out.trajectories) traj.actions = Tensor::matrix(traj.length(), model.action_dim());
  for (std::size_t r = 0; r < windows.size(); ++r) {
    auto dst = out.trajectories[windows.trajectory[r]].actions->row_span(windows.t[r]);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = std::clamp(mean.at(r, c), action_low, action_high);
  }
  out.provenance["proxy_label"] = {{"k", model.config().window.k}, {"symmetric", model.config().window.symmetric}};
  return out;
}

}  // namespace ssorl::idm
