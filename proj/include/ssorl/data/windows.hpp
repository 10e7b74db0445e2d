#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ssorl/env/trajectory.hpp"
#include "ssorl/nn/tensor.hpp"

namespace ssorl::data {

/// How positions before the first state (or after the last, for symmetric
/// windows) are filled.
enum class PaddingMode { kRepeatEdge, kZero };

PaddingMode parse_padding(const std::string& name);
std::string padding_name(PaddingMode mode);

struct WindowSpec {
  std::size_t k = 0;
  bool symmetric = false;
  PaddingMode padding = PaddingMode::kRepeatEdge;

  /// k+2 states, or 2k+2 for the symmetric variant.
  std::size_t length() const { return symmetric ? 2 * k + 2 : k + 2; }
};

/// States s_{t-k}, ..., s_{t+1} (through s_{t+1+k} when symmetric) around
/// transition t, with the target action when known.
struct TransitionWindow {
  nn::Tensor states;  // [length, state_dim]
  std::optional<std::vector<double>> action;
  std::size_t t = 0;           // 0-based step within the trajectory
  std::size_t trajectory = 0;  // position in the input list
};

std::vector<TransitionWindow> extract_windows(const std::vector<env::Trajectory>& trajectories,
                                              const WindowSpec& spec);

/// Windows flattened row-wise into a design matrix, the form the IDM trains on.
struct WindowMatrix {
  nn::Tensor inputs;   // [n, length * state_dim]
  nn::Tensor targets;  // [n, action_dim]; empty when actions are absent
  std::vector<std::size_t> trajectory;
  std::vector<std::size_t> t;

  std::size_t size() const { return trajectory.size(); }
  bool has_targets() const { return !targets.empty(); }
  /// Rows at `rows`, in that order.
  WindowMatrix select(const std::vector<std::size_t>& rows) const;
  /// Rows of `a` followed by rows of `b`.
  static WindowMatrix concat(const WindowMatrix& a, const WindowMatrix& b);
};

/// Every window of every trajectory. Targets are filled when all
/// trajectories carry actions and left empty when none do; a mix throws.
WindowMatrix window_matrix(const std::vector<env::Trajectory>& trajectories, const WindowSpec& spec,
                           std::size_t action_dim);

}  // namespace ssorl::data
