#include "ssorl/nn/layers.hpp"

#include <stdexcept>

#include <Eigen/Dense>

namespace ssorl::nn {

Activation parse_activation(std::string_view name) {
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

Var apply_activation(Var x, Activation a) {
  switch (a) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return relu(x);
    case Activation::kTanh: return tanh(x);
  }
  return x;
}

void init_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng) {
  params.add_glorot(prefix + "/w", in, out, rng);
  params.add_zeros(prefix + "/b", {1, out});
}

Var linear(Graph& g, ParamSet& params, const std::string& prefix, Var x) {
  Var w = g.param(params, prefix + "/w");
  Var b = g.param(params, prefix + "/b");
  if (x.cols() != w.rows()) {
    throw std::invalid_argument("linear '" + prefix + "': input width " + std::to_string(x.cols()) + " != " +
                                std::to_string(w.rows()));
  }
  return matmul(x, w) + b;
}

Var mlp_forward(Graph& g, ParamSet& params, const std::string& prefix, Var input,
                std::span<const std::size_t> layer_sizes, Activation hidden, Activation output) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("mlp_forward: need at least input and output widths");
  Var h = input;
  const std::size_t layers = layer_sizes.size() - 1;
  for (std::size_t i = 0; i < layers; ++i) {
    const std::string w_name = prefix + "/w" + std::to_string(i);
    const std::string b_name = prefix + "/b" + std::to_string(i);
    const Tensor& w = params.value(w_name);
    if (h.cols() != layer_sizes[i] || w.rows() != layer_sizes[i] || w.cols() != layer_sizes[i + 1]) {
      throw std::invalid_argument("mlp_forward '" + prefix + "': shape mismatch at layer " + std::to_string(i) +
                                  " (input width " + std::to_string(h.cols()) + ", weight " + w.shape_string() +
                                  ", expected [" + std::to_string(layer_sizes[i]) + ", " +
                                  std::to_string(layer_sizes[i + 1]) + "])");
    }
    h = matmul(h, g.param(params, w_name)) + g.param(params, b_name);
    h = apply_activation(h, i + 1 == layers ? output : hidden);
  }
  return h;
}

Mlp::Mlp(std::string prefix, std::vector<std::size_t> layer_sizes, Activation hidden, Activation output)
    : prefix_(std::move(prefix)), sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
}

std::string Mlp::weight_name(std::size_t layer) const { return prefix_ + "/w" + std::to_string(layer); }
std::string Mlp::bias_name(std::size_t layer) const { return prefix_ + "/b" + std::to_string(layer); }

void Mlp::init(ParamSet& params, Rng& rng) const {
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    params.add_glorot(weight_name(i), sizes_[i], sizes_[i + 1], rng);
    params.add_zeros(bias_name(i), {1, sizes_[i + 1]});
  }
}

Var Mlp::forward(Graph& g, ParamSet& params, Var input) const {
  return mlp_forward(g, params, prefix_, input, sizes_, hidden_, output_);
}

Var Mlp::forward_frozen(Graph& g, const ParamSet& params, Var input) const {
  Var h = input;
  const std::size_t layers = layer_count();
  for (std::size_t i = 0; i < layers; ++i) {
    Var w = g.constant(params.value(weight_name(i)));
    if (h.cols() != w.rows()) {
      throw std::invalid_argument("mlp '" + prefix_ + "': shape mismatch at layer " + std::to_string(i));
    }
    h = apply_activation(matmul(h, w) + g.constant(params.value(bias_name(i))), i + 1 == layers ? output_ : hidden_);
  }
  return h;
}

Tensor Mlp::evaluate(const ParamSet& params, const Tensor& input) const {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const std::size_t n = input.rows();
  Mat h = Eigen::Map<const Mat>(input.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(input.cols()));
  const std::size_t layers = layer_count();
  for (std::size_t i = 0; i < layers; ++i) {
    const Tensor& w = params.value(weight_name(i));
    const Tensor& b = params.value(bias_name(i));
    if (static_cast<std::size_t>(h.cols()) != w.rows()) {
      throw std::invalid_argument("mlp '" + prefix_ + "': shape mismatch at layer " + std::to_string(i));
    }
    auto wm = Eigen::Map<const Mat>(w.data(), static_cast<Eigen::Index>(w.rows()), static_cast<Eigen::Index>(w.cols()));
    auto bv = Eigen::Map<const Eigen::RowVectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    Mat next = h * wm;
    next.rowwise() += bv;
    switch (i + 1 == layers ? output_ : hidden_) {
      case Activation::kRelu: next = next.cwiseMax(0.0); break;
      case Activation::kTanh: next = next.array().tanh().matrix(); break;
      case Activation::kIdentity: break;
    }
    h = std::move(next);
  }
  return Tensor({n, static_cast<std::size_t>(h.cols())}, std::vector<double>(h.data(), h.data() + h.size()));
}

void init_attention_block(ParamSet& params, const std::string& prefix, const AttentionBlockConfig& config, Rng& rng) {
  const std::size_t d = config.d_model;
  params.add(prefix + "/ln1/gain", Tensor({1, d}, 1.0));
  params.add_zeros(prefix + "/ln1/bias", {1, d});
  init_linear(params, prefix + "/query", d, d, rng);
  init_linear(params, prefix + "/key", d, d, rng);
  init_linear(params, prefix + "/value", d, d, rng);
  init_linear(params, prefix + "/proj", d, d, rng);
  params.add(prefix + "/ln2/gain", Tensor({1, d}, 1.0));
  params.add_zeros(prefix + "/ln2/bias", {1, d});
  init_linear(params, prefix + "/fc1", d, config.mlp_ratio * d, rng);
  init_linear(params, prefix + "/fc2", config.mlp_ratio * d, d, rng);
}

Var causal_attention_block(Graph& g, ParamSet& params, const std::string& prefix, const AttentionBlockConfig& config,
                           Var tokens, std::size_t batch, std::size_t seq) {
  if (seq > config.context) {
    throw std::invalid_argument("causal_attention_block: sequence length " + std::to_string(seq) + " exceeds context " +
                                std::to_string(config.context));
  }
  if (tokens.rows() != batch * seq || tokens.cols() != config.d_model) {
    throw std::invalid_argument("causal_attention_block: tokens must be [batch*seq, d_model], got " +
                                tokens.value().shape_string());
  }
  Var h = layer_norm(tokens, g.param(params, prefix + "/ln1/gain"), g.param(params, prefix + "/ln1/bias"));
  Var q = linear(g, params, prefix + "/query", h);
  Var k = linear(g, params, prefix + "/key", h);
  Var v = linear(g, params, prefix + "/value", h);
  Var attended = causal_attention(q, k, v, batch, seq, config.heads);
  Var x = tokens + linear(g, params, prefix + "/proj", attended);
  Var m = layer_norm(x, g.param(params, prefix + "/ln2/gain"), g.param(params, prefix + "/ln2/bias"));
  m = relu(linear(g, params, prefix + "/fc1", m));
  return x + linear(g, params, prefix + "/fc2", m);
}

}  // namespace ssorl::nn
