#include "ssorl/orl/dt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ssorl/nn/optim.hpp"

namespace ssorl::orl {

using nn::Graph;
using nn::Var;

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

Json SequenceModelSpec::to_json() const {
  return Json{{"state_dim", state_dim},       {"action_dim", action_dim}, {"context", context},
              {"layers", layers},             {"d_model", d_model},       {"heads", heads},
              {"max_timestep", max_timestep}, {"joint_heads", joint_heads}, {"log_std_min", log_std_min},
              {"log_std_max", log_std_max}};
}

SequenceModelSpec SequenceModelSpec::from_json(const Json& j) {
  SequenceModelSpec s;
  s.state_dim = j.at("state_dim").get<std::size_t>();
  s.action_dim = j.at("action_dim").get<std::size_t>();
  s.context = j.at("context").get<std::size_t>();
  s.layers = j.at("layers").get<std::size_t>();
  s.d_model = j.at("d_model").get<std::size_t>();
  s.heads = j.at("heads").get<std::size_t>();
  s.max_timestep = j.at("max_timestep").get<std::size_t>();
  s.joint_heads = j.at("joint_heads").get<bool>();
  s.log_std_min = j.value("log_std_min", s.log_std_min);
  s.log_std_max = j.value("log_std_max", s.log_std_max);
  return s;
}

nn::AttentionBlockConfig SequenceModel::block_config() const {
  return {spec_.d_model, spec_.heads, 3 * spec_.context, 4};
}

SequenceModel::SequenceModel(SequenceModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  if (spec_.d_model % spec_.heads != 0) throw std::invalid_argument("SequenceModel: d_model must divide into heads");
  Rng rng(derive_seed(seed, 0xd7));
  const std::size_t d = spec_.d_model;
  nn::init_linear(params_, "embed_rtg", 1, d, rng);
  nn::init_linear(params_, "embed_state", spec_.state_dim, d, rng);
  nn::init_linear(params_, "embed_action", spec_.action_dim, d, rng);
  params_.add_glorot("embed_time", spec_.max_timestep + 1, d, rng);
  params_.add("ln_embed/gain", Tensor({1, d}, 1.0));
  params_.add_zeros("ln_embed/bias", {1, d});
  for (std::size_t i = 0; i < spec_.layers; ++i) nn::init_attention_block(params_, "block" + std::to_string(i), block_config(), rng);
  params_.add("ln_final/gain", Tensor({1, d}, 1.0));
  params_.add_zeros("ln_final/bias", {1, d});
  nn::init_linear(params_, "head_mean", d, spec_.action_dim, rng);
  nn::init_linear(params_, "head_log_std", d, spec_.action_dim, rng);
  // Joint heads last, so DT and DT-Joint built from one seed share every other parameter.
  if (spec_.joint_heads) {
    nn::init_linear(params_, "head_state", d, spec_.state_dim, rng);
    nn::init_linear(params_, "head_reward", d, 1, rng);
  }
}

SequenceModel::SequenceModel(SequenceModelSpec spec, nn::ParamSet params) : spec_(std::move(spec)) {
  SequenceModel reference(spec_, 0);
  if (reference.params_.names() != params.names()) throw std::invalid_argument("SequenceModel: parameters do not match spec");
  params_ = std::move(reference.params_);
  params_.copy_values_from(params);
}

std::vector<std::string> SequenceModel::action_head_names() {
  return {"head_mean/w", "head_mean/b", "head_log_std/w", "head_log_std/b"};
}

SequenceModel::Output SequenceModel::forward(Graph& g, const SequenceBatch& b) {
  const std::size_t n = b.batch * b.seq, d = spec_.d_model;
  if (b.seq > spec_.context) {
    throw std::invalid_argument("SequenceModel: window of " + std::to_string(b.seq) + " steps exceeds context " +
                                std::to_string(spec_.context));
  }
  if (b.states.rows() != n || b.timesteps.size() != n) throw std::invalid_argument("SequenceModel: malformed batch");
  std::vector<std::size_t> ts(b.timesteps);
  for (auto& t : ts) t = std::min(t, spec_.max_timestep);
  Var time = gather_rows(g.param(params_, "embed_time"), ts);
  Var rtg = nn::linear(g, params_, "embed_rtg", g.constant(b.rtg)) + time;
  Var st = nn::linear(g, params_, "embed_state", g.constant(b.states)) + time;
  Var ac = nn::linear(g, params_, "embed_action", g.constant(b.actions)) + time;
  // [n, 3d] -> [3n, d] interleaves (g_t, s_t, a_t) per step.
  Var h = reshape(nn::concat_cols({rtg, st, ac}), 3 * n, d);
  h = layer_norm(h, g.param(params_, "ln_embed/gain"), g.param(params_, "ln_embed/bias"));
  for (std::size_t i = 0; i < spec_.layers; ++i) {
    h = nn::causal_attention_block(g, params_, "block" + std::to_string(i), block_config(), h, b.batch, 3 * b.seq);
  }
  h = layer_norm(h, g.param(params_, "ln_final/gain"), g.param(params_, "ln_final/bias"));
  Var h3 = reshape(h, n, 3 * d);
  Var state_tok = slice_cols(h3, d, 2 * d);
  Var action_tok = slice_cols(h3, 2 * d, 3 * d);
  Output out;
  out.mean = tanh(nn::linear(g, params_, "head_mean", state_tok));
  out.log_std = clamp(nn::linear(g, params_, "head_log_std", state_tok), spec_.log_std_min, spec_.log_std_max);
  if (spec_.joint_heads) {
    out.state_pred = nn::linear(g, params_, "head_state", action_tok);
    out.reward_pred = nn::linear(g, params_, "head_reward", action_tok);
  }
  return out;
}

Var dt_objective(Graph& g, SequenceModel& model, const SequenceBatch& b, double alpha, double lambda_s, double lambda_r,
                 DtLossTerms* terms) {
  auto out = model.forward(g, b);
  const std::size_t n = b.batch * b.seq;
  const std::size_t ad = model.spec().action_dim;
  double n_lab = 0.0;
  for (double m : b.labelled.storage()) n_lab += m;

  DtLossTerms t;
  t.labelled_tokens = n_lab;
  Var objective = g.constant(Tensor::scalar(0.0));
  if (n_lab > 0.0) {
    Var mask = g.constant(b.labelled);
    const double scale = static_cast<double>(n) / n_lab;
    Var diff = g.constant(b.actions) - out.mean;
    Var nll_tok = sum_rows(0.5 * square(diff) * exp(-2.0 * out.log_std) + out.log_std) + kHalfLog2Pi * static_cast<double>(ad);
    Var ent_tok = sum_rows(out.log_std) + (kHalfLog2Pi + 0.5) * static_cast<double>(ad);
    Var nll = scale * mean(mask * nll_tok);
    Var ent = scale * mean(mask * ent_tok);
    t.action_nll = nll.value().item();
    t.entropy = ent.value().item();
    objective = nll - alpha * ent;
  }
  if (model.spec().joint_heads) {
    Var se = mean(sum_rows(square(out.state_pred - g.constant(b.next_states))));
    Var re = mean(square(out.reward_pred - g.constant(b.rewards)));
    t.state_mse = se.value().item();
    t.reward_mse = re.value().item();
    objective = objective + lambda_s * se + lambda_r * re;
  }
  t.objective = objective.value().item();
  if (terms) *terms = t;
  return objective;
}

Var dt_temperature_loss(Graph& g, nn::ParamSet& temperature, double entropy, double target_entropy) {
  return exp(g.param(temperature, "log_alpha")) * (entropy - target_entropy);
}

double rtg_scale_for(const env::Dataset& dataset) {
  double scale = 1.0;
  for (const auto& t : dataset.trajectories) scale = std::max(scale, std::abs(t.meta.total_return));
  return scale;
}

SequenceData make_sequence_data(const env::Dataset& dataset, const StateNormalizer& normalizer, double rtg_scale) {
  SequenceData data;
  data.min_length = std::numeric_limits<std::size_t>::max();
  for (const auto& t : dataset.trajectories) {
    if (t.length() < 1) throw std::invalid_argument("sequence data: trajectory shorter than one step");
    SequenceData::Item item;
    item.states = normalizer.apply(t.states);
    item.labelled = t.labelled();
    item.actions = t.labelled() ? *t.actions : Tensor::matrix(t.length(), dataset.action_dim);
    item.rewards = t.rewards;
    item.rtg.resize(t.length());
    double g = 0.0;
    for (std::size_t i = t.length(); i-- > 0;) {
      g += t.rewards[i];
      item.rtg[i] = g / rtg_scale;
    }
    data.min_length = std::min(data.min_length, t.length());
    data.max_length = std::max(data.max_length, t.length());
    data.items.push_back(std::move(item));
  }
  if (data.items.empty()) throw std::invalid_argument("sequence data: empty dataset");
  return data;
}

SequenceBatch sample_sequences(const SequenceData& data, std::size_t batch, std::size_t seq, Rng& rng) {
  if (seq == 0 || seq > data.min_length) throw std::invalid_argument("sample_sequences: bad window length");
  const std::size_t sd = data.items.front().states.cols(), ad = data.items.front().actions.cols();
  const std::size_t n = batch * seq;
  SequenceBatch b;
  b.batch = batch;
  b.seq = seq;
  b.rtg = Tensor::matrix(n, 1);
  b.states = Tensor::matrix(n, sd);
  b.actions = Tensor::matrix(n, ad);
  b.labelled = Tensor::matrix(n, 1);
  b.next_states = Tensor::matrix(n, sd);
  b.rewards = Tensor::matrix(n, 1);
  b.timesteps.resize(n);
  for (std::size_t i = 0; i < batch; ++i) {
    const auto& item = data.items[rng.index(data.items.size())];
    const std::size_t T = item.rewards.size();
    const std::size_t start = rng.index(T - seq + 1);
    for (std::size_t j = 0; j < seq; ++j) {
      const std::size_t row = i * seq + j, t = start + j;
      b.rtg[row] = item.rtg[t];
      std::copy_n(item.states.data() + t * sd, sd, b.states.data() + row * sd);
      std::copy_n(item.states.data() + (t + 1) * sd, sd, b.next_states.data() + row * sd);
      std::copy_n(item.actions.data() + t * ad, ad, b.actions.data() + row * ad);
      b.labelled[row] = item.labelled ? 1.0 : 0.0;
      b.rewards[row] = item.rewards[t];
      b.timesteps[row] = t;
    }
  }
  return b;
}

namespace {

TrainedAgent train_sequence(const env::Dataset& all, const TrainerConfig& config, std::uint64_t seed, bool joint) {
  TrainedAgent agent;
  agent.algorithm = joint ? Algorithm::kDtJoint : Algorithm::kDt;
  agent.config = config;
  agent.seed = seed;
  agent.state_dim = all.state_dim;
  agent.action_dim = all.action_dim;
  agent.normalizer = StateNormalizer::fit(all);
  const double rtg_scale = rtg_scale_for(all);
  const SequenceData data = make_sequence_data(all, agent.normalizer, rtg_scale);

  SequenceModelSpec spec;
  spec.state_dim = all.state_dim;
  spec.action_dim = all.action_dim;
  spec.context = config.context;
  spec.layers = config.layers;
  spec.d_model = config.d_model;
  spec.heads = config.heads;
  spec.max_timestep = data.max_length;
  spec.joint_heads = joint;
  spec.log_std_min = config.log_std_min;
  spec.log_std_max = config.log_std_max;
  SequenceModel model(spec, seed);

  nn::ParamSet temperature;
  temperature.add("log_alpha", Tensor::scalar(std::log(config.dt_init_temperature)));
  const double target_entropy = -static_cast<double>(all.action_dim);
  nn::AdamConfig opt{config.dt_lr};
  opt.weight_decay = config.dt_weight_decay;
  nn::AdamConfig temp_opt{config.dt_temperature_lr};
  nn::LinearWarmup warmup{config.warmup_steps ? config.warmup_steps : std::max<std::size_t>(1, config.budget / 10)};
  const std::size_t seq = std::min(config.context, data.min_length);
  const double lambda_s = joint ? config.lambda_s : 0.0;
  const double lambda_r = joint ? config.lambda_r : 0.0;

  Rng rng(derive_seed(seed, 0xd75));
  for (std::size_t it = 1; it <= config.budget; ++it) {
    const SequenceBatch batch = sample_sequences(data, config.batch_size, seq, rng);
    const double alpha = std::exp(temperature.value("log_alpha").item());
    DtLossTerms terms;
    {
      Graph g;
      Var loss = dt_objective(g, model, batch, alpha, lambda_s, lambda_r, &terms);
      if (!std::isfinite(terms.objective)) throw std::runtime_error("train_dt: non-finite loss at iteration " + std::to_string(it));
      g.backward(loss);
      auto grads = g.gradients(model.params());
      if (config.grad_clip > 0.0) nn::clip_grad_norm(grads, config.grad_clip);
      nn::adam_step(model.params(), grads, opt, warmup.factor(it - 1));
    }
    if (terms.labelled_tokens > 0.0) {
      Graph g;
      Var loss = dt_temperature_loss(g, temperature, terms.entropy, target_entropy);
      g.backward(loss);
      nn::adam_step(temperature, g.gradients(temperature), temp_opt);
    }
    if (config.log_every && (it % config.log_every == 0 || it == config.budget)) {
      agent.metrics.push_back({{"iteration", it},
                               {"objective", terms.objective},
                               {"action_nll", terms.action_nll},
                               {"entropy", terms.entropy},
                               {"state_mse", terms.state_mse},
                               {"reward_mse", terms.reward_mse},
                               {"alpha", alpha}});
    }
  }
  agent.actor = std::move(model.params());
  agent.extra = {{"model", spec.to_json()},
                 {"rtg_scale", rtg_scale},
                 {"log_alpha", temperature.value("log_alpha").item()}};
  return agent;
}

class DtPolicy final : public env::Policy {
 public:
  DtPolicy(const TrainedAgent& agent, double target_return)
      : model_(SequenceModelSpec::from_json(agent.extra.at("model")), agent.actor),
        normalizer_(agent.normalizer),
        rtg_scale_(agent.extra.at("rtg_scale").get<double>()),
        target_(target_return) {}

  void reset(std::span<const double>, Rng&) override {
    states_.clear();
    actions_.clear();
    rtg_.clear();
    rtg_now_ = target_;
  }

  env::Vec act(std::span<const double> state, Rng&) override {
    const auto& spec = model_.spec();
    states_.push_back(normalizer_.apply(state));
    actions_.emplace_back(spec.action_dim, 0.0);
    rtg_.push_back(rtg_now_ / rtg_scale_);
    const std::size_t len = std::min(spec.context, states_.size());
    const std::size_t first = states_.size() - len;
    SequenceBatch b;
    b.batch = 1;
    b.seq = len;
    b.rtg = Tensor::matrix(len, 1);
    b.states = Tensor::matrix(len, spec.state_dim);
    b.actions = Tensor::matrix(len, spec.action_dim);
    b.labelled = Tensor::matrix(len, 1, 1.0);
    b.next_states = Tensor::matrix(len, spec.state_dim);
    b.rewards = Tensor::matrix(len, 1);
    for (std::size_t j = 0; j < len; ++j) {
      b.rtg[j] = rtg_[first + j];
      std::copy(states_[first + j].begin(), states_[first + j].end(), b.states.row_span(j).begin());
      std::copy(actions_[first + j].begin(), actions_[first + j].end(), b.actions.row_span(j).begin());
      b.timesteps.push_back(first + j);
    }
    Graph g;
    auto out = model_.forward(g, b);
    const auto mean = out.mean.value().row_span(len - 1);
    return env::Vec(mean.begin(), mean.end());
  }

  void observe(std::span<const double> action, double reward, std::span<const double>) override {
    actions_.back().assign(action.begin(), action.end());
    rtg_now_ -= reward;
  }

  /// Current return-to-go target (unscaled).
  double rtg() const { return rtg_now_; }

 private:
  SequenceModel model_;
  StateNormalizer normalizer_;
  double rtg_scale_;
  double target_;
  double rtg_now_ = 0.0;
  std::vector<std::vector<double>> states_;
  std::vector<std::vector<double>> actions_;
  std::vector<double> rtg_;
};

}  // namespace

TrainedAgent train_dt(const env::Dataset& combined, const TrainerConfig& config, std::uint64_t seed) {
  require_actions(combined, "train_dt");
  return train_sequence(combined, config, seed, false);
}

TrainedAgent train_dt_joint(const env::Dataset& labelled, const env::Dataset& unlabelled, const TrainerConfig& config,
                            std::uint64_t seed) {
  if (labelled.empty()) throw std::invalid_argument("train_dt_joint: labelled set is empty");
  require_actions(labelled, "train_dt_joint");
  env::Dataset all = labelled;
  for (const auto& t : unlabelled.trajectories) {
    if (t.labelled()) throw std::invalid_argument("train_dt_joint: unlabelled set contains actions");
    all.trajectories.push_back(t);
  }
  return train_sequence(all, config, seed, true);
}

std::unique_ptr<env::Policy> make_dt_policy(const TrainedAgent& agent, double target_return) {
  return std::make_unique<DtPolicy>(agent, target_return);
}

}  // namespace ssorl::orl
