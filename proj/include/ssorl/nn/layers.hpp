#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssorl/common/random.hpp"
#include "ssorl/nn/autodiff.hpp"

namespace ssorl::nn {

enum class Activation { kIdentity, kRelu, kTanh };

Activation parse_activation(std::string_view name);
std::string_view activation_name(Activation a);
Var apply_activation(Var x, Activation a);

/// Affine map x W + b with parameters `<prefix>/w` [in, out] and `<prefix>/b` [1, out].
void init_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, Rng& rng);
Var linear(Graph& g, ParamSet& params, const std::string& prefix, Var x);

/// Feed-forward network over batched rows. `layer_sizes` lists widths from
/// input to output; layer i uses `<prefix>/w<i>` and `<prefix>/b<i>`.
/// Hidden layers apply `hidden`, the last layer applies `output`.
/// Throws std::invalid_argument naming the offending layer on shape mismatch.
Var mlp_forward(Graph& g, ParamSet& params, const std::string& prefix, Var input,
                std::span<const std::size_t> layer_sizes, Activation hidden, Activation output = Activation::kIdentity);

class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, std::vector<std::size_t> layer_sizes, Activation hidden = Activation::kRelu,
      Activation output = Activation::kIdentity);

  /// Adds Glorot-uniform weights and zero biases to `params`.
  void init(ParamSet& params, Rng& rng) const;
  Var forward(Graph& g, ParamSet& params, Var input) const;
  /// Forward pass with the parameters entered as constants (no gradients).
  Var forward_frozen(Graph& g, const ParamSet& params, Var input) const;
  /// Plain evaluation outside any graph.
  Tensor evaluate(const ParamSet& params, const Tensor& input) const;

  const std::string& prefix() const { return prefix_; }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;

 private:
  std::string prefix_;
  std::vector<std::size_t> sizes_;
  Activation hidden_ = Activation::kRelu;
  Activation output_ = Activation::kIdentity;
};

struct AttentionBlockConfig {
  std::size_t d_model = 64;
  std::size_t heads = 2;
  std::size_t context = 24;  // maximum token sequence length
  std::size_t mlp_ratio = 4;
};

void init_attention_block(ParamSet& params, const std::string& prefix, const AttentionBlockConfig& config, Rng& rng);

/// Pre-norm transformer block: x + Attn(LN(x)), then + MLP(LN(.)).
/// `tokens` is [batch*seq, d_model]. Throws if seq exceeds the context.
Var causal_attention_block(Graph& g, ParamSet& params, const std::string& prefix, const AttentionBlockConfig& config,
                           Var tokens, std::size_t batch, std::size_t seq);

}  // namespace ssorl::nn
