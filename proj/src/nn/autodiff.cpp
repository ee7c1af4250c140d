#include "formal/nn/autodiff.hpp"

#include <cmath>
#include <string>

#include "formal/error.hpp"

namespace formal::nn {

const Matrix& Var::value() const { return graph->value(id); }

Var Graph::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  grads_.emplace_back();
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::param(Parameter& p, bool trainable) {
  if (!trainable) return param(static_cast<const Parameter&>(p));
  if (auto it = leaf_cache_.find(&p); it != leaf_cache_.end()) return Var{this, it->second};
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  grads_.emplace_back();
  int id = static_cast<int>(nodes_.size()) - 1;
  leaf_cache_.emplace(&p, id);
  return Var{this, id};
}

Var Graph::param(const Parameter& p) {
  if (auto it = leaf_cache_.find(&p); it != leaf_cache_.end()) return Var{this, it->second};
  Node n;
  n.external = &p.value;
  nodes_.push_back(std::move(n));
  grads_.emplace_back();
  int id = static_cast<int>(nodes_.size()) - 1;
  leaf_cache_.emplace(&p, id);
  return Var{this, id};
}

const Matrix& Graph::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.external ? *n.external : n.value;
}

Matrix& Graph::grad(int id) {
  Matrix& g = grads_[static_cast<std::size_t>(id)];
  if (g.size() == 0) {
    const Matrix& v = value(id);
    g = Matrix::Zero(v.rows(), v.cols());
  }
  return g;
}

Var Graph::record(Matrix value, std::vector<int> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (int i : inputs) n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(i)].requires_grad;
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  grads_.emplace_back();
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Var out) {
  if (out.graph != this) throw ShapeError("backward: variable from another graph");
  const Matrix& v = value(out.id);
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("backward: output must be 1x1");
  grad(out.id)(0, 0) += 1.0;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || grads_[static_cast<std::size_t>(i)].size() == 0) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param) n.param->grad += grads_[static_cast<std::size_t>(i)];
  }
}

Var Bound::operator()(int index) {
  if (mut_ && trainable_) return g_.param((*mut_)[index], true);
  return g_.param((*const_)[index]);
}

namespace {

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + std::to_string(a.rows()) + "x" +
                   std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

void same_shape(const char* op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

Graph& graph_of(Var a) {
  if (!a.graph) throw ShapeError("operation on an unbound variable");
  return *a.graph;
}

}  // namespace

Var matmul(Var a, Var b) {
  const Matrix& A = a.value();
  const Matrix& B = b.value();
  if (A.cols() != B.rows()) shape_error("matmul", A, B);
  return graph_of(a).record(A * B, {a.id, b.id}, [ia = a.id, ib = b.id](Graph& g, int self) {
    const Matrix& dC = g.grad_of(self);
    if (g.requires_grad(ia)) g.grad(ia).noalias() += dC * g.value(ib).transpose();
    if (g.requires_grad(ib)) g.grad(ib).noalias() += g.value(ia).transpose() * dC;
  });
}

Var matmul_tn(Var a, Var b) {
  const Matrix& A = a.value();
  const Matrix& B = b.value();
  if (A.rows() != B.rows()) shape_error("matmul_tn", A, B);
  return graph_of(a).record(A.transpose() * B, {a.id, b.id}, [ia = a.id, ib = b.id](Graph& g, int self) {
    const Matrix& dC = g.grad_of(self);
    if (g.requires_grad(ia)) g.grad(ia).noalias() += g.value(ib) * dC.transpose();
    if (g.requires_grad(ib)) g.grad(ib).noalias() += g.value(ia) * dC;
  });
}

Var affine(Var w, Var x, Var b) {
  const Matrix& W = w.value();
  const Matrix& X = x.value();
  const Matrix& B = b.value();
  if (W.cols() != X.rows()) shape_error("affine", W, X);
  if (B.rows() != W.rows() || B.cols() != X.cols()) shape_error("affine", W, B);
  Matrix y = B;
  y.noalias() += W * X;
  return graph_of(w).record(std::move(y), {w.id, x.id, b.id}, [iw = w.id, ix = x.id, ib = b.id](Graph& g, int self) {
    const Matrix& dY = g.grad_of(self);
    if (g.requires_grad(iw)) g.grad(iw).noalias() += dY * g.value(ix).transpose();
    if (g.requires_grad(ix)) g.grad(ix).noalias() += g.value(iw).transpose() * dY;
    if (g.requires_grad(ib)) g.grad(ib) += dY;
  });
}

Var affine2(Var w, Var x, Var u, Var h, Var b) {
  const Matrix& W = w.value();
  const Matrix& X = x.value();
  const Matrix& U = u.value();
  const Matrix& H = h.value();
  const Matrix& B = b.value();
  if (W.cols() != X.rows()) shape_error("affine2", W, X);
  if (U.cols() != H.rows()) shape_error("affine2", U, H);
  if (U.rows() != W.rows() || H.cols() != X.cols()) shape_error("affine2", W, U);
  if (B.rows() != W.rows() || B.cols() != X.cols()) shape_error("affine2", W, B);
  Matrix y = B;
  y.noalias() += W * X;
  y.noalias() += U * H;
  return graph_of(w).record(
      std::move(y), {w.id, x.id, u.id, h.id, b.id},
      [iw = w.id, ix = x.id, iu = u.id, ih = h.id, ib = b.id](Graph& g, int self) {
        const Matrix& dY = g.grad_of(self);
        if (g.requires_grad(iw)) g.grad(iw).noalias() += dY * g.value(ix).transpose();
        if (g.requires_grad(ix)) g.grad(ix).noalias() += g.value(iw).transpose() * dY;
        if (g.requires_grad(iu)) g.grad(iu).noalias() += dY * g.value(ih).transpose();
        if (g.requires_grad(ih)) g.grad(ih).noalias() += g.value(iu).transpose() * dY;
        if (g.requires_grad(ib)) g.grad(ib) += dY;
      });
}

Var add(Var a, Var b) {
  same_shape("add", a.value(), b.value());
  return graph_of(a).record(a.value() + b.value(), {a.id, b.id}, [ia = a.id, ib = b.id](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.requires_grad(ia)) g.grad(ia) += d;
    if (g.requires_grad(ib)) g.grad(ib) += d;
  });
}

Var sub(Var a, Var b) {
  same_shape("sub", a.value(), b.value());
  return graph_of(a).record(a.value() - b.value(), {a.id, b.id}, [ia = a.id, ib = b.id](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.requires_grad(ia)) g.grad(ia) += d;
    if (g.requires_grad(ib)) g.grad(ib) -= d;
  });
}

Var mul(Var a, Var b) {
  same_shape("mul", a.value(), b.value());
  return graph_of(a).record(a.value().cwiseProduct(b.value()), {a.id, b.id},
                            [ia = a.id, ib = b.id](Graph& g, int self) {
                              const Matrix& d = g.grad_of(self);
                              if (g.requires_grad(ia)) g.grad(ia) += d.cwiseProduct(g.value(ib));
                              if (g.requires_grad(ib)) g.grad(ib) += d.cwiseProduct(g.value(ia));
                            });
}

Var scale(Var a, double s) {
  return graph_of(a).record(a.value() * s, {a.id}, [ia = a.id, s](Graph& g, int self) {
    g.grad(ia) += s * g.grad_of(self);
  });
}

Var add_colwise(Var m, Var v) {
  const Matrix& M = m.value();
  const Matrix& V = v.value();
  if (V.cols() != 1 || V.rows() != M.rows()) shape_error("add_colwise", M, V);
  Matrix y = M.colwise() + V.col(0);
  return graph_of(m).record(std::move(y), {m.id, v.id}, [im = m.id, iv = v.id](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    if (g.requires_grad(im)) g.grad(im) += d;
    if (g.requires_grad(iv)) g.grad(iv) += d.rowwise().sum();
  });
}

Var sigmoid(Var a) {
  Matrix y = a.value().unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  });
  return graph_of(a).record(std::move(y), {a.id}, [ia = a.id](Graph& g, int self) {
    const Matrix& y = g.value(self);
    g.grad(ia) += g.grad_of(self).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
  });
}

Var tanh(Var a) {
  Matrix y = a.value().array().tanh().matrix();
  return graph_of(a).record(std::move(y), {a.id}, [ia = a.id](Graph& g, int self) {
    const Matrix& y = g.value(self);
    g.grad(ia) += g.grad_of(self).cwiseProduct((1.0 - y.array().square()).matrix());
  });
}

Var relu(Var a) {
  Matrix y = a.value().cwiseMax(0.0);
  return graph_of(a).record(std::move(y), {a.id}, [ia = a.id](Graph& g, int self) {
    const Matrix& x = g.value(ia);
    g.grad(ia) += g.grad_of(self).cwiseProduct(x.unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; }));
  });
}

namespace {

Matrix softmax_of(const Matrix& z) {
  const double m = z.maxCoeff();
  Matrix e = (z.array() - m).exp().matrix();
  return e / e.sum();
}

}  // namespace

Var softmax(Var a) { return softmax_temperature(a, 1.0); }

Var softmax_temperature(Var a, double tau) {
  if (!(tau > 0)) throw InputError("softmax_temperature: tau must be positive");
  Matrix y = softmax_of(a.value() / tau);
  return graph_of(a).record(std::move(y), {a.id}, [ia = a.id, tau](Graph& g, int self) {
    const Matrix& y = g.value(self);
    const Matrix& d = g.grad_of(self);
    const double dot = d.cwiseProduct(y).sum();
    g.grad(ia) += (y.array() * (d.array() - dot) / tau).matrix();
  });
}

Var cross_entropy(Var logits, int target) {
  const Matrix& z = logits.value();
  if (z.cols() != 1 || target < 0 || target >= z.rows())
    throw ShapeError("cross_entropy: target " + std::to_string(target) + " outside logits of size " +
                     std::to_string(z.rows()) + "x" + std::to_string(z.cols()));
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  Matrix out(1, 1);
  out(0, 0) = lse - z(target, 0);
  return graph_of(logits).record(std::move(out), {logits.id}, [iz = logits.id, target](Graph& g, int self) {
    const double d = g.grad_of(self)(0, 0);
    Matrix p = softmax_of(g.value(iz));
    p(target, 0) -= 1.0;
    g.grad(iz) += d * p;
  });
}

Var vcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("vcat: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts[0].cols();
  std::vector<int> ids;
  for (const auto& p : parts) {
    if (p.cols() != cols) shape_error("vcat", parts[0].value(), p.value());
    rows += p.rows();
    ids.push_back(p.id);
  }
  Matrix y(rows, cols);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return graph_of(parts[0]).record(std::move(y), ids, [ids](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    Eigen::Index r = 0;
    for (int i : ids) {
      const Eigen::Index n = g.value(i).rows();
      if (g.requires_grad(i)) g.grad(i) += d.middleRows(r, n);
      r += n;
    }
  });
}

Var hcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("hcat: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts[0].rows();
  std::vector<int> ids;
  for (const auto& p : parts) {
    if (p.rows() != rows) shape_error("hcat", parts[0].value(), p.value());
    cols += p.cols();
    ids.push_back(p.id);
  }
  Matrix y(rows, cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    y.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return graph_of(parts[0]).record(std::move(y), ids, [ids](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    Eigen::Index c = 0;
    for (int i : ids) {
      const Eigen::Index n = g.value(i).cols();
      if (g.requires_grad(i)) g.grad(i) += d.middleCols(c, n);
      c += n;
    }
  });
}

Var transpose(Var a) {
  return graph_of(a).record(a.value().transpose(), {a.id}, [ia = a.id](Graph& g, int self) {
    g.grad(ia) += g.grad_of(self).transpose();
  });
}

Var row(Var table, int index) {
  const Matrix& T = table.value();
  if (index < 0 || index >= T.rows())
    throw ShapeError("row: index " + std::to_string(index) + " outside " + std::to_string(T.rows()) + " rows");
  return graph_of(table).record(T.row(index).transpose(), {table.id}, [it = table.id, index](Graph& g, int self) {
    g.grad(it).row(index) += g.grad_of(self).transpose();
  });
}

Var sum(Var a) {
  Matrix y(1, 1);
  y(0, 0) = a.value().sum();
  return graph_of(a).record(std::move(y), {a.id}, [ia = a.id](Graph& g, int self) {
    g.grad(ia).array() += g.grad_of(self)(0, 0);
  });
}

Var add_n(const std::vector<Var>& terms) {
  if (terms.empty()) throw ShapeError("add_n: no inputs");
  Matrix y = terms[0].value();
  std::vector<int> ids{terms[0].id};
  for (std::size_t i = 1; i < terms.size(); ++i) {
    same_shape("add_n", y, terms[i].value());
    y += terms[i].value();
    ids.push_back(terms[i].id);
  }
  return graph_of(terms[0]).record(std::move(y), ids, [ids](Graph& g, int self) {
    const Matrix& d = g.grad_of(self);
    for (int i : ids)
      if (g.requires_grad(i)) g.grad(i) += d;
  });
}

}  // namespace formal::nn
