#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ssorl::nn {

using Shape = std::vector<std::size_t>;

/// Dense row-major tensor of doubles. Graph operations work on rank-2
/// tensors; scalars are stored as shape {1, 1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value) { return Tensor({1, 1}, value); }
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  /// Builds a rows x cols matrix from nested initializer lists.
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// A 1 x n row vector.
  static Tensor row(std::span<const double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Leading extent for rank-2 use. Rank-1 tensors behave as a single row.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  /// Row `r` of a rank-2 tensor.
  std::span<const double> row_span(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }
  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols(), cols()}; }

  double item() const;  // requires exactly one element
  bool all_finite() const;
  void fill(double value);
  Tensor reshaped(Shape shape) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

}  // namespace ssorl::nn
