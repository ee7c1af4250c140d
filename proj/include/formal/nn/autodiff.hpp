#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "formal/nn/params.hpp"

namespace formal::nn {

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while the graph
/// lives.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so a reverse
/// sweep visits every node after all of its consumers.
///
/// Parameter leaves either accumulate into Parameter::grad during backward()
/// (trainable) or act as constants (frozen). Gradients still flow through
/// operations on frozen leaves into their other inputs.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var param(Parameter& p, bool trainable = true);
  Var param(const Parameter& p);

  const Matrix& value(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  /// Gradient buffer of a node, zero-initialized on first use.
  Matrix& grad(int id);
  /// Gradient flowing into `id` during backward(); empty if none reached it.
  const Matrix& grad_of(int id) const { return grads_[static_cast<std::size_t>(id)]; }

  /// Seeds d(out)/d(out) = 1 for a 1x1 output and sweeps the tape.
  void backward(Var out);

  std::size_t size() const { return nodes_.size(); }

  /// Appends an operation node; `inputs` decide whether it requires a grad.
  Var record(Matrix value, std::vector<int> inputs, BackwardFn backward);

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Parameter* param = nullptr;
    bool requires_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  std::unordered_map<const Parameter*, int> leaf_cache_;
};

/// Lazily binds the parameters of a store to one graph.
class Bound {
 public:
  Bound(Graph& g, ParamStore& store, bool trainable = true) : g_(g), mut_(&store), const_(&store), trainable_(trainable) {}
  Bound(Graph& g, const ParamStore& store) : g_(g), const_(&store) {}

  Var operator()(int index);
  Graph& graph() { return g_; }

 private:
  Graph& g_;
  ParamStore* mut_ = nullptr;
  const ParamStore* const_;
  bool trainable_ = false;
};

// Primitive operations. Every op throws ShapeError (naming the op) when the
// input shapes are incompatible.

Var matmul(Var a, Var b);
/// aᵀ b without materializing the transpose.
Var matmul_tn(Var a, Var b);
/// W x + b.
Var affine(Var w, Var x, Var b);
/// W x + U h + b.
Var affine2(Var w, Var x, Var u, Var h, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// M + v broadcast over the columns of M (v is a column vector).
Var add_colwise(Var m, Var v);
Var sigmoid(Var a);
Var tanh(Var a);
/// Subgradient at exactly 0 is 0.
Var relu(Var a);
/// Softmax over all elements of a.
Var softmax(Var a);
/// softmax(a / tau); tau must be positive.
Var softmax_temperature(Var a, double tau);
/// -log softmax(logits)[target] as a 1x1 value. logits is a column vector.
Var cross_entropy(Var logits, int target);
/// Stacks column blocks vertically.
Var vcat(const std::vector<Var>& parts);
/// Places blocks side by side.
Var hcat(const std::vector<Var>& parts);
Var transpose(Var a);
/// Row `index` of a matrix, returned as a column vector.
Var row(Var table, int index);
/// Sum of all elements, 1x1.
Var sum(Var a);
/// Sum of equally-shaped terms.
Var add_n(const std::vector<Var>& terms);

}  // namespace formal::nn
