#pragma once

// Helpers shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "ssorl/common/random.hpp"
#include "ssorl/nn/autodiff.hpp"
#include "ssorl/orl/common.hpp"
#include "ssorl/orl/dt.hpp"

namespace ssorl::tsup {

using nn::Graph;
using nn::ParamSet;
using nn::Tensor;
using nn::Var;

inline Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::matrix(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
  return t;
}

struct GradCheck {
  /// |g_analytic - g_numeric| / max(|g_analytic|, |g_numeric|) in the L2 norm
  /// over every probed coordinate of every parameter.
  double rel_error = 0.0;
  /// Parameter with the largest absolute discrepancy.
  std::string worst;
  double worst_abs = 0.0;
  std::size_t coords = 0;
  /// Coordinates whose left and right differences disagree by more than
  /// 1e-3: a ReLU or clamp kink lies inside the stencil, so the loss is not
  /// differentiable there and the point should be redrawn.
  std::size_t kinks = 0;
};

/// Central differences on up to `per_tensor` coordinates of each parameter
/// of `params`.
inline GradCheck check_gradients(ParamSet& params, const std::function<Var(Graph&)>& loss, Rng& rng,
                                 double h = 1e-5, std::size_t per_tensor = 12) {
  nn::Gradients analytic;
  {
    Graph g;
    Var l = loss(g);
    g.backward(l);
    analytic = g.gradients(params);
  }
  auto value = [&] {
    Graph g;
    return loss(g).value().item();
  };
  const double center = value();
  GradCheck out;
  double diff = 0.0, na = 0.0, nn_ = 0.0;
  for (auto& entry : params.entries()) {
    Tensor& v = entry.value;
    std::vector<std::size_t> idx;
    if (v.size() <= per_tensor) {
      for (std::size_t i = 0; i < v.size(); ++i) idx.push_back(i);
    } else {
      idx = rng.sample_without_replacement(v.size(), per_tensor);
    }
    for (std::size_t i : idx) {
      const double orig = v[i];
      v[i] = orig + h;
      const double up = value();
      v[i] = orig - h;
      const double down = value();
      v[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      if (std::abs((up - center) - (center - down)) / h > 1e-3) ++out.kinks;
      const double a = analytic.at(entry.name)[i];
      diff += (a - numeric) * (a - numeric);
      na += a * a;
      nn_ += numeric * numeric;
      if (std::abs(a - numeric) > out.worst_abs || out.worst.empty()) {
        out.worst_abs = std::abs(a - numeric);
        out.worst = entry.name;
      }
    }
    out.coords += idx.size();
  }
  out.rel_error = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn_), 1e-300});
  return out;
}

inline orl::TransitionData random_transitions(std::size_t n, std::size_t sd, std::size_t ad, Rng& rng) {
  orl::TransitionData d;
  d.states = random_tensor(n, sd, rng);
  d.actions = Tensor::matrix(n, ad);
  for (std::size_t i = 0; i < d.actions.size(); ++i) d.actions[i] = rng.uniform(-0.9, 0.9);
  d.rewards = random_tensor(n, 1, rng);
  d.next_states = random_tensor(n, sd, rng);
  d.not_done = Tensor::matrix(n, 1, 1.0);
  return d;
}

/// Random sequence batch; `labelled_frac` of the windows carry actions.
inline orl::SequenceBatch random_sequences(std::size_t batch, std::size_t seq, std::size_t sd, std::size_t ad,
                                           double labelled_frac, Rng& rng) {
  orl::SequenceBatch b;
  b.batch = batch;
  b.seq = seq;
  const std::size_t n = batch * seq;
  b.rtg = random_tensor(n, 1, rng);
  b.states = random_tensor(n, sd, rng);
  b.next_states = random_tensor(n, sd, rng);
  b.rewards = random_tensor(n, 1, rng);
  b.actions = Tensor::matrix(n, ad);
  b.labelled = Tensor::matrix(n, 1);
  for (std::size_t w = 0; w < batch; ++w) {
    const bool lab = rng.uniform() < labelled_frac;
    for (std::size_t t = 0; t < seq; ++t) {
      const std::size_t row = w * seq + t;
      b.labelled[row] = lab ? 1.0 : 0.0;
      if (lab) {
        for (std::size_t j = 0; j < ad; ++j) b.actions[row * ad + j] = rng.uniform(-0.9, 0.9);
      }
      b.timesteps.push_back(t + rng.index(5));
    }
  }
  return b;
}

}  // namespace ssorl::tsup
