#include "ssorl/nn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include <Eigen/Core>

namespace ssorl::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

Graph& graph_of(Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) throw std::invalid_argument("autodiff: operands belong to different graphs");
  return *a.graph;
}

Graph& graph_of(Var a) {
  if (a.graph == nullptr) throw std::invalid_argument("autodiff: operand is not attached to a graph");
  return *a.graph;
}

const Tensor& value_of(Graph& g, std::size_t id) { return g.value(Var{&g, id}); }

struct Broadcast {
  std::size_t rows, cols;
  std::size_t a_rows, a_cols, b_rows, b_cols;

  std::size_t a_index(std::size_t i, std::size_t j) const {
    return (a_rows == 1 ? 0 : i) * a_cols + (a_cols == 1 ? 0 : j);
  }
  std::size_t b_index(std::size_t i, std::size_t j) const {
    return (b_rows == 1 ? 0 : i) * b_cols + (b_cols == 1 ? 0 : j);
  }
  bool same() const { return a_rows == b_rows && a_cols == b_cols; }
};

Broadcast broadcast_layout(const Tensor& a, const Tensor& b, const char* op) {
  Broadcast bc{std::max(a.rows(), b.rows()), std::max(a.cols(), b.cols()), a.rows(), a.cols(), b.rows(), b.cols()};
  const bool rows_ok = (a.rows() == bc.rows || a.rows() == 1) && (b.rows() == bc.rows || b.rows() == 1);
  const bool cols_ok = (a.cols() == bc.cols || a.cols() == 1) && (b.cols() == bc.cols || b.cols() == 1);
  if (!rows_ok || !cols_ok) {
    throw std::invalid_argument(std::string("autodiff ") + op + ": incompatible shapes " + a.shape_string() + " and " +
                                b.shape_string());
  }
  return bc;
}

// Broadcasting binary op: f computes the value, dfx / dfy the partials.
template <typename F, typename Dx, typename Dy>
Var binary_op(Var a, Var b, const char* name, F f, Dx dfx, Dy dfy) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast bc = broadcast_layout(av, bv, name);
  Tensor out = Tensor::matrix(bc.rows, bc.cols);
  if (bc.same()) {
    const double* x = av.data();
    const double* y = bv.data();
    double* o = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) o[i] = f(x[i], y[i]);
  } else {
    for (std::size_t i = 0; i < bc.rows; ++i)
      for (std::size_t j = 0; j < bc.cols; ++j) out.at(i, j) = f(av[bc.a_index(i, j)], bv[bc.b_index(i, j)]);
  }
  const std::size_t ia = a.id, ib = b.id;
  return g.emplace(std::move(out), {ia, ib}, [ia, ib, bc, dfx, dfy](Graph& gr, std::size_t, const Tensor& grad) {
    const Tensor& x = value_of(gr, ia);
    const Tensor& y = value_of(gr, ib);
    Tensor* ga = gr.grad_sink(ia);
    Tensor* gb = gr.grad_sink(ib);
    if (bc.same()) {
      const std::size_t n = grad.size();
      if (ga)
        for (std::size_t i = 0; i < n; ++i) (*ga)[i] += grad[i] * dfx(x[i], y[i]);
      if (gb)
        for (std::size_t i = 0; i < n; ++i) (*gb)[i] += grad[i] * dfy(x[i], y[i]);
      return;
    }
    for (std::size_t i = 0; i < bc.rows; ++i) {
      for (std::size_t j = 0; j < bc.cols; ++j) {
        const double go = grad[i * bc.cols + j];
        const std::size_t xa = bc.a_index(i, j), yb = bc.b_index(i, j);
        if (ga) (*ga)[xa] += go * dfx(x[xa], y[yb]);
        if (gb) (*gb)[yb] += go * dfy(x[xa], y[yb]);
      }
    }
  });
}

// Elementwise unary op; the derivative sees input x and output y.
template <typename F, typename D>
Var unary_op(Var a, F f, D df) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  Tensor out(av.shape());
  const double* x = av.data();
  double* o = out.data();
  for (std::size_t i = 0; i < av.size(); ++i) o[i] = f(x[i]);
  const std::size_t ia = a.id;
  return g.emplace(std::move(out), {ia}, [ia, df](Graph& gr, std::size_t self, const Tensor& grad) {
    Tensor* ga = gr.grad_sink(ia);
    if (!ga) return;
    const Tensor& x = value_of(gr, ia);
    const Tensor& y = value_of(gr, self);
    for (std::size_t i = 0; i < grad.size(); ++i) (*ga)[i] += grad[i] * df(x[i], y[i]);
  });
}

}  // namespace

const Tensor& Var::value() const {
  if (graph == nullptr) throw std::invalid_argument("Var: not attached to a graph");
  return graph->value(*this);
}

Var Graph::emplace(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
  if (backward_done_) throw std::logic_error("Graph: cannot extend a graph after backward()");
  Node node;
  node.value = std::move(value);
  for (std::size_t p : parents) {
    if (p >= nodes_.size()) throw std::out_of_range("Graph: parent id out of range");
    node.requires_grad = node.requires_grad || nodes_[p].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Graph::constant(Tensor value) { return emplace(std::move(value), {}, {}); }

Var Graph::input(Tensor value) {
  Var v = emplace(std::move(value), {}, {});
  nodes_[v.id].requires_grad = true;
  return v;
}

Var Graph::param(ParamSet& params, const std::string& name) {
  const auto key = std::make_pair(static_cast<const ParamSet*>(&params), name);
  if (auto it = param_nodes_.find(key); it != param_nodes_.end()) return Var{this, it->second};
  Var v = input(params.value(name));
  param_nodes_.emplace(key, v.id);
  return v;
}

Tensor* Graph::grad_sink(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return nullptr;
  if (!node.grad_ready) {
    node.grad = Tensor(node.value.shape(), 0.0);
    node.grad_ready = true;
  }
  return &node.grad;
}

void Graph::backward(Var loss) {
  if (loss.graph != this) throw std::invalid_argument("Graph::backward: loss belongs to another graph");
  const Node& root = nodes_.at(loss.id);
  if (root.value.size() != 1) {
    throw std::invalid_argument("Graph::backward: loss must be scalar, got shape " + root.value.shape_string());
  }
  if (backward_done_) throw std::logic_error("Graph::backward: already called");
  backward_done_ = true;
  if (!root.requires_grad) return;
  grad_sink(loss.id)->fill(1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.grad_ready || !node.backward) continue;
    node.backward(*this, i, node.grad);
  }
}

Tensor Graph::grad(Var v) const {
  const Node& node = nodes_.at(v.id);
  if (node.grad_ready) return node.grad;
  return Tensor(node.value.shape(), 0.0);
}

Gradients Graph::gradients(const ParamSet& params) const {
  Gradients out;
  for (const auto& e : params.entries()) {
    auto it = param_nodes_.find(std::make_pair(&params, e.name));
    if (it == param_nodes_.end()) {
      out.emplace(e.name, Tensor(e.value.shape(), 0.0));
    } else {
      out.emplace(e.name, grad(Var{const_cast<Graph*>(this), it->second}));
    }
  }
  return out;
}

// ---- arithmetic -----------------------------------------------------------

Var operator+(Var a, Var b) {
  return binary_op(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var operator-(Var a, Var b) {
  return binary_op(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var operator*(Var a, Var b) {
  return binary_op(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var operator-(Var a) { return a * -1.0; }

Var operator+(Var a, double c) {
  return unary_op(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}
Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) {
  return unary_op(a, [c](double x) { return c - x; }, [](double, double) { return -1.0; });
}
Var operator*(Var a, double c) {
  return unary_op(a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}
Var operator*(double c, Var a) { return a * c; }

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ (" + av.shape_string() + " x " + bv.shape_string() + ")");
  }
  Tensor out = Tensor::matrix(av.rows(), bv.cols());
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  const std::size_t ia = a.id, ib = b.id;
  return g.emplace(std::move(out), {ia, ib}, [ia, ib](Graph& gr, std::size_t, const Tensor& grad) {
    auto gm = as_matrix(grad);
    if (Tensor* ga = gr.grad_sink(ia)) as_matrix(*ga).noalias() += gm * as_matrix(value_of(gr, ib)).transpose();
    if (Tensor* gb = gr.grad_sink(ib)) as_matrix(*gb).noalias() += as_matrix(value_of(gr, ia)).transpose() * gm;
  });
}

// ---- elementwise nonlinearities -------------------------------------------

Var relu(Var a) {
  return unary_op(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary_op(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary_op(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary_op(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var square(Var a) {
  return unary_op(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary_op(
      a, [](double x) { return std::fabs(x); }, [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var clamp(Var a, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return unary_op(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var minimum(Var a, Var b) {
  if (!a.value().same_shape(b.value())) throw std::invalid_argument("minimum: operands must share a shape");
  // Ties route the gradient to the first operand.
  return binary_op(
      a, b, "minimum", [](double x, double y) { return x <= y ? x : y; },
      [](double x, double y) { return x <= y ? 1.0 : 0.0; }, [](double x, double y) { return x <= y ? 0.0 : 1.0; });
}

// ---- reductions -----------------------------------------------------------

Var sum(Var a) {
  Graph& g = graph_of(a);
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  const std::size_t ia = a.id;
  return g.emplace(Tensor::scalar(total), {ia}, [ia](Graph& gr, std::size_t, const Tensor& grad) {
    if (Tensor* ga = gr.grad_sink(ia)) {
      const double go = grad[0];
      for (double& v : ga->storage()) v += go;
    }
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw std::invalid_argument("mean: empty tensor");
  return sum(a) * (1.0 / static_cast<double>(n));
}

Var sum_rows(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  Tensor out = Tensor::matrix(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    double s = 0.0;
    for (double v : av.row_span(i)) s += v;
    out[i] = s;
  }
  const std::size_t ia = a.id;
  return g.emplace(std::move(out), {ia}, [ia](Graph& gr, std::size_t, const Tensor& grad) {
    Tensor* ga = gr.grad_sink(ia);
    if (!ga) return;
    for (std::size_t i = 0; i < ga->rows(); ++i)
      for (double& v : ga->row_span(i)) v += grad[i];
  });
}

Var logsumexp_rows(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  if (av.cols() == 0) throw std::invalid_argument("logsumexp_rows: no columns");
  Tensor out = Tensor::matrix(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto row = av.row_span(i);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - m);
    out[i] = m + std::log(s);
  }
  const std::size_t ia = a.id;
  return g.emplace(std::move(out), {ia}, [ia](Graph& gr, std::size_t self, const Tensor& grad) {
    Tensor* ga = gr.grad_sink(ia);
    if (!ga) return;
    const Tensor& x = value_of(gr, ia);
    const Tensor& y = value_of(gr, self);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto xr = x.row_span(i);
      auto gr_row = ga->row_span(i);
      for (std::size_t j = 0; j < xr.size(); ++j) gr_row[j] += grad[i] * std::exp(xr[j] - y[i]);
    }
  });
}

// ---- shape manipulation ---------------------------------------------------

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  if (rows * cols != av.size()) {
    throw std::invalid_argument("reshape: cannot view " + av.shape_string() + " as [" + std::to_string(rows) + ", " +
                                std::to_string(cols) + "]");
  }
  const std::size_t ia = a.id;
  return g.emplace(av.reshaped({rows, cols}), {ia}, [ia](Graph& gr, std::size_t, const Tensor& grad) {
    if (Tensor* ga = gr.grad_sink(ia)) {
      for (std::size_t i = 0; i < grad.size(); ++i) (*ga)[i] += grad[i];
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no operands");
  Graph& g = graph_of(parts.front());
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, offsets;
  for (Var p : parts) {
    graph_of(parts.front(), p);
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row counts differ");
    ids.push_back(p.id);
    offsets.push_back(total);
    total += p.cols();
  }
  Tensor out = Tensor::matrix(rows, total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t i = 0; i < rows; ++i) std::copy_n(pv.row_span(i).data(), pv.cols(), out.row_span(i).data() + offsets[k]);
  }
  return g.emplace(std::move(out), ids, [ids, offsets](Graph& gr, std::size_t, const Tensor& grad) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      Tensor* gk = gr.grad_sink(ids[k]);
      if (!gk) continue;
      const std::size_t c = gk->cols();
      for (std::size_t i = 0; i < gk->rows(); ++i) {
        const double* src = grad.row_span(i).data() + offsets[k];
        double* dst = gk->row_span(i).data();
        for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
      }
    }
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  if (begin > end || end > av.cols()) throw std::invalid_argument("slice_cols: range out of bounds");
  const std::size_t width = end - begin;
  Tensor out = Tensor::matrix(av.rows(), width);
  for (std::size_t i = 0; i < av.rows(); ++i) std::copy_n(av.row_span(i).data() + begin, width, out.row_span(i).data());
  const std::size_t ia = a.id;
  return g.emplace(std::move(out), {ia}, [ia, begin, width](Graph& gr, std::size_t, const Tensor& grad) {
    Tensor* ga = gr.grad_sink(ia);
    if (!ga) return;
    for (std::size_t i = 0; i < ga->rows(); ++i) {
      double* dst = ga->row_span(i).data() + begin;
      const double* src = grad.row_span(i).data();
      for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
    }
  });
}

Var gather_rows(Var a, std::span<const std::size_t> indices) {
  Graph& g = graph_of(a);
  const Tensor& av = a.value();
  const std::size_t cols = av.cols();
  Tensor out = Tensor::matrix(indices.size(), cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= av.rows()) throw std::out_of_range("gather_rows: index out of range");
    std::copy_n(av.row_span(indices[r]).data(), cols, out.row_span(r).data());
  }
  const std::size_t ia = a.id;
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return g.emplace(std::move(out), {ia}, [ia, idx = std::move(idx)](Graph& gr, std::size_t, const Tensor& grad) {
    Tensor* ga = gr.grad_sink(ia);
    if (!ga) return;
    const std::size_t c = ga->cols();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      double* dst = ga->row_span(idx[r]).data();
      const double* src = grad.row_span(r).data();
      for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
    }
  });
}

Var detach(Var a) { return graph_of(a).constant(a.value()); }

// ---- fused layers -----------------------------------------------------------

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  Graph& g = graph_of(x, gain);
  graph_of(x, bias);
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (gain.value().size() != cols || bias.value().size() != cols) {
    throw std::invalid_argument("layer_norm: gain/bias width must equal input width " + std::to_string(cols));
  }
  auto normalized = std::make_shared<Tensor>(Tensor::matrix(rows, cols));
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Tensor out = Tensor::matrix(rows, cols);
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = xv.row_span(i);
    double mu = 0.0;
    for (double v : r) mu += v;
    mu /= static_cast<double>(cols);
    double var = 0.0;
    for (double v : r) var += (v - mu) * (v - mu);
    var /= static_cast<double>(cols);
    const double rs = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = rs;
    for (std::size_t j = 0; j < cols; ++j) {
      const double xh = (r[j] - mu) * rs;
      normalized->at(i, j) = xh;
      out.at(i, j) = xh * gv[j] + bv[j];
    }
  }
  const std::size_t ix = x.id, ig = gain.id, ib = bias.id;
  return g.emplace(std::move(out), {ix, ig, ib},
                   [ix, ig, ib, normalized, inv_std](Graph& gr, std::size_t, const Tensor& grad) {
                     const Tensor& gv = value_of(gr, ig);
                     const std::size_t rows = grad.rows(), cols = grad.cols();
                     if (Tensor* gg = gr.grad_sink(ig)) {
                       for (std::size_t i = 0; i < rows; ++i)
                         for (std::size_t j = 0; j < cols; ++j) (*gg)[j] += grad.at(i, j) * normalized->at(i, j);
                     }
                     if (Tensor* gb = gr.grad_sink(ib)) {
                       for (std::size_t i = 0; i < rows; ++i)
                         for (std::size_t j = 0; j < cols; ++j) (*gb)[j] += grad.at(i, j);
                     }
                     Tensor* gx = gr.grad_sink(ix);
                     if (!gx) return;
                     const double n = static_cast<double>(cols);
                     for (std::size_t i = 0; i < rows; ++i) {
                       double mean_d = 0.0, mean_dx = 0.0;
                       for (std::size_t j = 0; j < cols; ++j) {
                         const double d = grad.at(i, j) * gv[j];
                         mean_d += d;
                         mean_dx += d * normalized->at(i, j);
                       }
                       mean_d /= n;
                       mean_dx /= n;
                       const double rs = (*inv_std)[i];
                       for (std::size_t j = 0; j < cols; ++j) {
                         const double d = grad.at(i, j) * gv[j];
                         gx->at(i, j) += rs * (d - mean_d - normalized->at(i, j) * mean_dx);
                       }
                     }
                   });
}

Var causal_attention(Var q, Var k, Var v, std::size_t batch, std::size_t seq, std::size_t heads) {
  Graph& g = graph_of(q, k);
  graph_of(q, v);
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  const std::size_t d = qv.cols();
  if (heads == 0 || d % heads != 0) throw std::invalid_argument("causal_attention: width not divisible by head count");
  if (qv.rows() != batch * seq || !qv.same_shape(kv) || !qv.same_shape(vv)) {
    throw std::invalid_argument("causal_attention: q, k, v must all be [batch*seq, d]");
  }
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  // probs[(b*heads + h)*seq*seq + i*seq + j], zero above the diagonal.
  auto probs = std::make_shared<std::vector<double>>(batch * heads * seq * seq, 0.0);
  Tensor out = Tensor::matrix(batch * seq, d);
  std::vector<double> scores(seq);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      double* p = probs->data() + (b * heads + h) * seq * seq;
      const std::size_t c0 = h * dh;
      for (std::size_t i = 0; i < seq; ++i) {
        const double* qi = qv.data() + (b * seq + i) * d + c0;
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j <= i; ++j) {
          const double* kj = kv.data() + (b * seq + j) * d + c0;
          double s = 0.0;
          for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          scores[j] = s * scale;
          m = std::max(m, scores[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          scores[j] = std::exp(scores[j] - m);
          z += scores[j];
        }
        double* oi = out.data() + (b * seq + i) * d + c0;
        for (std::size_t j = 0; j <= i; ++j) {
          const double pij = scores[j] / z;
          p[i * seq + j] = pij;
          const double* vj = vv.data() + (b * seq + j) * d + c0;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += pij * vj[c];
        }
      }
    }
  }
  const std::size_t iq = q.id, ik = k.id, iv = v.id;
  return g.emplace(
      std::move(out), {iq, ik, iv},
      [iq, ik, iv, probs, batch, seq, heads, dh, d, scale](Graph& gr, std::size_t, const Tensor& grad) {
        const Tensor& qv = value_of(gr, iq);
        const Tensor& kv = value_of(gr, ik);
        const Tensor& vv = value_of(gr, iv);
        Tensor* gq = gr.grad_sink(iq);
        Tensor* gk = gr.grad_sink(ik);
        Tensor* gv = gr.grad_sink(iv);
        std::vector<double> dp(seq), ds(seq);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const double* p = probs->data() + (b * heads + h) * seq * seq;
            const std::size_t c0 = h * dh;
            for (std::size_t i = 0; i < seq; ++i) {
              const double* goi = grad.data() + (b * seq + i) * d + c0;
              double row_dot = 0.0;
              for (std::size_t j = 0; j <= i; ++j) {
                const double* vj = vv.data() + (b * seq + j) * d + c0;
                double s = 0.0;
                for (std::size_t c = 0; c < dh; ++c) s += goi[c] * vj[c];
                dp[j] = s;
                row_dot += s * p[i * seq + j];
                if (gv) {
                  double* gvj = gv->data() + (b * seq + j) * d + c0;
                  const double pij = p[i * seq + j];
                  for (std::size_t c = 0; c < dh; ++c) gvj[c] += pij * goi[c];
                }
              }
              for (std::size_t j = 0; j <= i; ++j) ds[j] = p[i * seq + j] * (dp[j] - row_dot) * scale;
              const double* qi = qv.data() + (b * seq + i) * d + c0;
              for (std::size_t j = 0; j <= i; ++j) {
                const double* kj = kv.data() + (b * seq + j) * d + c0;
                if (gq) {
                  double* gqi = gq->data() + (b * seq + i) * d + c0;
                  for (std::size_t c = 0; c < dh; ++c) gqi[c] += ds[j] * kj[c];
                }
                if (gk) {
                  double* gkj = gk->data() + (b * seq + j) * d + c0;
                  for (std::size_t c = 0; c < dh; ++c) gkj[c] += ds[j] * qi[c];
                }
              }
            }
          }
        }
      });
}

}  // namespace ssorl::nn
