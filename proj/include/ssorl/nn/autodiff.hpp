#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssorl/nn/param_set.hpp"
#include "ssorl/nn/tensor.hpp"

namespace ssorl::nn {

class Graph;

/// Handle to a node on a Graph tape.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so the tape
/// order is already a topological order for the backward sweep.
///
/// A graph is single-use: build the forward pass, call backward() once on a
/// scalar node, then read gradients. Nodes that do not depend on any
/// parameter or tracked input skip gradient bookkeeping entirely.
class Graph {
 public:
  /// Called with the graph, the node's own id and the gradient w.r.t. its value.
  using BackwardFn = std::function<void(Graph&, std::size_t self, const Tensor& out_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Untracked input; gradients do not flow into it.
  Var constant(Tensor value);
  /// Tracked input; its gradient is readable after backward().
  Var input(Tensor value);
  /// Leaf bound to `params[name]`. Repeated calls return the same node.
  Var param(ParamSet& params, const std::string& name);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Runs the backward sweep. `loss` must hold exactly one element.
  void backward(Var loss);

  /// Gradient of the loss w.r.t. node `v`; zeros if `v` was not reached.
  Tensor grad(Var v) const;

  /// Gradients for every parameter of `params` (zeros when unreached).
  Gradients gradients(const ParamSet& params) const;

  std::size_t size() const { return nodes_.size(); }

  /// Appends a node. `backward` may be empty when no parent requires grad.
  Var emplace(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  /// Gradient buffer of node `id` for accumulation during backward();
  /// nullptr when that node does not require gradients.
  Tensor* grad_sink(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_ready = false;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;
  std::map<std::pair<const ParamSet*, std::string>, std::size_t> param_nodes_;
  bool backward_done_ = false;
};

// Elementwise arithmetic. Binary operations broadcast a [1,n], [m,1] or
// [1,1] operand against an [m,n] operand.
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);

Var matmul(Var a, Var b);

Var relu(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var abs(Var a);
/// Clamp with straight-through gradient inside [lo, hi], zero outside.
Var clamp(Var a, double lo, double hi);
Var minimum(Var a, Var b);

/// Sum / mean of all entries, as a [1,1] node.
Var sum(Var a);
Var mean(Var a);
/// Per-row sum: [m,n] -> [m,1].
Var sum_rows(Var a);
/// Per-row log-sum-exp: [m,n] -> [m,1].
Var logsumexp_rows(Var a);

Var reshape(Var a, std::size_t rows, std::size_t cols);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
/// Rows of `a` picked by `indices` (repeats allowed); backward scatter-adds.
Var gather_rows(Var a, std::span<const std::size_t> indices);
/// Same value, no gradient flow.
Var detach(Var a);

/// Row-wise layer normalization with learnable gain [1,n] and bias [1,n].
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// Multi-head causal self-attention core. q, k, v are [batch*seq, d];
/// row b*seq + t is token t of sequence b. Returns softmax(q k^T / sqrt(dh)) v
/// per head, with position t attending only to positions <= t.
Var causal_attention(Var q, Var k, Var v, std::size_t batch, std::size_t seq, std::size_t heads);

}  // namespace ssorl::nn
