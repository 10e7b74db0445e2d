#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssorl/common/random.hpp"
#include "ssorl/nn/tensor.hpp"

namespace ssorl::nn {

/// Gradients keyed by parameter name.
using Gradients = std::map<std::string, Tensor>;

/// Named trainable tensors plus their adaptive-moment optimizer state.
/// Parameters keep insertion order, which fixes checkpoint layout.
class ParamSet {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor first_moment;
    Tensor second_moment;
  };

  /// Adds a parameter. Throws if `name` is already present.
  Tensor& add(const std::string& name, Tensor init);
  /// Adds a rank-2 parameter with Glorot-uniform entries.
  Tensor& add_glorot(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  Tensor& add_zeros(const std::string& name, Shape shape);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Entry& entry(const std::string& name);
  const Entry& entry(const std::string& name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;

  std::size_t step() const { return step_; }
  void increment_step() { ++step_; }
  void reset_optimizer_state();

  /// Copies only the parameter values of `other` (same names and shapes).
  void copy_values_from(const ParamSet& other);

  friend bool operator==(const ParamSet& a, const ParamSet& b);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t step_ = 0;
};

/// target <- (1 - tau) * target + tau * online, parameter-wise.
void soft_update(ParamSet& target, const ParamSet& online, double tau);

/// Zero gradients with the shapes of every parameter.
Gradients zero_gradients(const ParamSet& params);

}  // namespace ssorl::nn
