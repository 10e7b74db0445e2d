#pragma once

#include <cstddef>

#include "ssorl/nn/param_set.hpp"

namespace ssorl::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled (AdamW-style) weight decay; 0 disables it.
  double weight_decay = 0.0;
};

/// One bias-corrected adaptive-moment step, applied in place. `lr_scale`
/// multiplies the learning rate (warmup schedules). Every parameter of
/// `params` must have a gradient of matching shape; a non-finite gradient
/// throws std::domain_error naming the parameter, leaving `params` untouched.
void adam_step(ParamSet& params, const Gradients& grads, const AdamConfig& config, double lr_scale = 1.0);

/// Rescales `grads` so their joint L2 norm is at most `max_norm`. Returns
/// the norm before clipping.
double clip_grad_norm(Gradients& grads, double max_norm);

/// Linear learning-rate warmup: factor grows from 1/steps to 1 over the
/// first `steps` updates.
struct LinearWarmup {
  std::size_t steps = 0;
  double factor(std::size_t step) const;
};

}  // namespace ssorl::nn
