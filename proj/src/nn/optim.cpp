#include "ssorl/nn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssorl::nn {

void adam_step(ParamSet& params, const Gradients& grads, const AdamConfig& config, double lr_scale) {
  for (const auto& e : params.entries()) {
    auto it = grads.find(e.name);
    if (it == grads.end()) throw std::invalid_argument("adam_step: missing gradient for '" + e.name + "'");
    if (!it->second.same_shape(e.value)) {
      throw std::invalid_argument("adam_step: gradient shape " + it->second.shape_string() + " does not match parameter '" +
                                  e.name + "' " + e.value.shape_string());
    }
    if (!it->second.all_finite()) throw std::domain_error("adam_step: non-finite gradient for '" + e.name + "'");
  }

  params.increment_step();
  const double t = static_cast<double>(params.step());
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  const double lr = config.lr * lr_scale;

  for (auto& e : params.entries()) {
    const Tensor& g = grads.at(e.name);
    double* p = e.value.data();
    double* m = e.first_moment.data();
    double* v = e.second_moment.data();
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      if (config.weight_decay != 0.0) p[i] -= lr * config.weight_decay * p[i];
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

double clip_grad_norm(Gradients& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.values()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-12);
    for (auto& [name, g] : grads)
      for (double& v : g.storage()) v *= scale;
  }
  return norm;
}

double LinearWarmup::factor(std::size_t step) const {
  if (steps == 0) return 1.0;
  return std::min(1.0, static_cast<double>(step + 1) / static_cast<double>(steps));
}

}  // namespace ssorl::nn
