#include "ssorl/nn/param_set.hpp"

#include <cmath>
#include <stdexcept>

namespace ssorl::nn {

Tensor& ParamSet::add(const std::string& name, Tensor init) {
  if (contains(name)) throw std::invalid_argument("ParamSet: duplicate parameter '" + name + "'");
  Entry entry{name, std::move(init), {}, {}};
  entry.first_moment = Tensor(entry.value.shape(), 0.0);
  entry.second_moment = Tensor(entry.value.shape(), 0.0);
  index_[name] = entries_.size();
  entries_.push_back(std::move(entry));
  return entries_.back().value;
}

Tensor& ParamSet::add_glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor weights({fan_in, fan_out});
  for (double& w : weights.storage()) w = rng.uniform(-limit, limit);
  return add(name, std::move(weights));
}

Tensor& ParamSet::add_zeros(const std::string& name, Shape shape) { return add(name, Tensor(std::move(shape), 0.0)); }

ParamSet::Entry& ParamSet::entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamSet: no parameter '" + name + "'");
  return entries_[it->second];
}

const ParamSet::Entry& ParamSet::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamSet: no parameter '" + name + "'");
  return entries_[it->second];
}

Tensor& ParamSet::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamSet::value(const std::string& name) const { return entry(name).value; }

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

void ParamSet::reset_optimizer_state() {
  for (auto& e : entries_) {
    e.first_moment.fill(0.0);
    e.second_moment.fill(0.0);
  }
  step_ = 0;
}

void ParamSet::copy_values_from(const ParamSet& other) {
  for (auto& e : entries_) {
    const Tensor& src = other.value(e.name);
    if (!src.same_shape(e.value)) throw std::invalid_argument("ParamSet::copy_values_from: shape mismatch for " + e.name);
    e.value = src;
  }
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  if (a.entries_.size() != b.entries_.size() || a.step_ != b.step_) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.name != y.name || x.value != y.value || x.first_moment != y.first_moment ||
        x.second_moment != y.second_moment) {
      return false;
    }
  }
  return true;
}

void soft_update(ParamSet& target, const ParamSet& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must lie in (0, 1]");
  for (auto& e : target.entries()) {
    const Tensor& src = online.value(e.name);
    if (!src.same_shape(e.value)) throw std::invalid_argument("soft_update: shape mismatch for " + e.name);
    auto dst = e.value.values();
    auto s = src.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - tau) * dst[i] + tau * s[i];
  }
}

Gradients zero_gradients(const ParamSet& params) {
  Gradients grads;
  for (const auto& e : params.entries()) grads.emplace(e.name, Tensor(e.value.shape(), 0.0));
  return grads;
}

}  // namespace ssorl::nn
