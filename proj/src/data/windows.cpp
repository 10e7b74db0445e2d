#include "ssorl/data/windows.hpp"

#include <algorithm>
#include <stdexcept>

namespace ssorl::data {

PaddingMode parse_padding(const std::string& name) {
  if (name == "repeat") return PaddingMode::kRepeatEdge;
  if (name == "zero") return PaddingMode::kZero;
  throw std::invalid_argument("unknown padding mode '" + name + "'");
}

std::string padding_name(PaddingMode mode) { return mode == PaddingMode::kZero ? "zero" : "repeat"; }

namespace {

// Writes the window around step t of `traj` into `out` (length * state_dim values).
void fill_window(const env::Trajectory& traj, const WindowSpec& spec, std::size_t t, double* out) {
  const std::size_t sd = traj.state_dim();
  const auto last = static_cast<std::ptrdiff_t>(traj.length());
  const std::ptrdiff_t first = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(spec.k);
  for (std::size_t r = 0; r < spec.length(); ++r) {
    const std::ptrdiff_t idx = first + static_cast<std::ptrdiff_t>(r);
    double* row = out + r * sd;
    if ((idx < 0 || idx > last) && spec.padding == PaddingMode::kZero) {
      std::fill(row, row + sd, 0.0);
      continue;
    }
    const auto src = traj.states.row_span(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, last)));
    std::copy(src.begin(), src.end(), row);
  }
}

}  // namespace

std::vector<TransitionWindow> extract_windows(const std::vector<env::Trajectory>& trajectories,
                                              const WindowSpec& spec) {
  std::vector<TransitionWindow> out;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& traj = trajectories[i];
    for (std::size_t t = 0; t < traj.length(); ++t) {
      TransitionWindow w;
      w.states = nn::Tensor::matrix(spec.length(), traj.state_dim());
      fill_window(traj, spec, t, w.states.data());
      if (traj.actions) {
        const auto a = traj.actions->row_span(t);
        w.action = std::vector<double>(a.begin(), a.end());
      }
      w.t = t;
      w.trajectory = i;
      out.push_back(std::move(w));
    }
  }
  return out;
}

WindowMatrix window_matrix(const std::vector<env::Trajectory>& trajectories, const WindowSpec& spec,
                           std::size_t action_dim) {
  std::size_t n = 0, labelled = 0;
  std::size_t sd = trajectories.empty() ? 0 : trajectories.front().state_dim();
  for (const auto& t : trajectories) {
    if (t.state_dim() != sd) throw std::invalid_argument("window_matrix: inconsistent state dimensions");
    n += t.length();
    labelled += t.labelled() ? 1 : 0;
  }
  if (labelled != 0 && labelled != trajectories.size()) {
    throw std::invalid_argument("window_matrix: mix of labelled and unlabelled trajectories");
  }
  const bool with_targets = labelled != 0;
  WindowMatrix m;
  const std::size_t width = spec.length() * sd;
  m.inputs = nn::Tensor::matrix(n, width);
  if (with_targets) m.targets = nn::Tensor::matrix(n, action_dim);
  m.trajectory.reserve(n);
  m.t.reserve(n);
  std::size_t row = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& traj = trajectories[i];
    if (with_targets && traj.actions->cols() != action_dim) throw std::invalid_argument("window_matrix: action dim mismatch");
    for (std::size_t t = 0; t < traj.length(); ++t, ++row) {
      fill_window(traj, spec, t, m.inputs.data() + row * width);
      if (with_targets) {
        const auto a = traj.actions->row_span(t);
        std::copy(a.begin(), a.end(), m.targets.row_span(row).begin());
      }
      m.trajectory.push_back(i);
      m.t.push_back(t);
    }
  }
  return m;
}

WindowMatrix WindowMatrix::select(const std::vector<std::size_t>& rows) const {
  WindowMatrix out;
  const std::size_t w = inputs.cols();
  out.inputs = nn::Tensor::matrix(rows.size(), w);
  if (has_targets()) out.targets = nn::Tensor::matrix(rows.size(), targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    std::copy_n(inputs.data() + r * w, w, out.inputs.data() + i * w);
    if (has_targets()) std::copy_n(targets.data() + r * targets.cols(), targets.cols(), out.targets.data() + i * targets.cols());
    out.trajectory.push_back(trajectory.at(r));
    out.t.push_back(t.at(r));
  }
  return out;
}

WindowMatrix WindowMatrix::concat(const WindowMatrix& a, const WindowMatrix& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.inputs.cols() != b.inputs.cols() || a.has_targets() != b.has_targets()) {
    throw std::invalid_argument("WindowMatrix::concat: incompatible matrices");
  }
  WindowMatrix out;
  auto stack = [](const nn::Tensor& x, const nn::Tensor& y) {
    std::vector<double> v(x.storage());
    v.insert(v.end(), y.storage().begin(), y.storage().end());
    return nn::Tensor({x.rows() + y.rows(), x.cols()}, std::move(v));
  };
  out.inputs = stack(a.inputs, b.inputs);
  if (a.has_targets()) out.targets = stack(a.targets, b.targets);
  out.trajectory = a.trajectory;
  out.trajectory.insert(out.trajectory.end(), b.trajectory.begin(), b.trajectory.end());
  out.t = a.t;
  out.t.insert(out.t.end(), b.t.begin(), b.t.end());
  return out;
}

}  // namespace ssorl::data
