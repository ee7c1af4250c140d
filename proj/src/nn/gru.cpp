#include "formal/nn/gru.hpp"

#include "formal/error.hpp"

namespace formal::nn {

GruCell GruCell::declare(ParamStore& store, const std::string& prefix, int input, int hidden) {
  GruCell c{};
  c.input = input;
  c.hidden = hidden;
  c.wz = store.add(prefix + ".Wz", hidden, input);
  c.uz = store.add(prefix + ".Uz", hidden, hidden);
  c.bz = store.add(prefix + ".bz", hidden, 1, true);
  c.wr = store.add(prefix + ".Wr", hidden, input);
  c.ur = store.add(prefix + ".Ur", hidden, hidden);
  c.br = store.add(prefix + ".br", hidden, 1, true);
  c.wn = store.add(prefix + ".Wn", hidden, input);
  c.un = store.add(prefix + ".Un", hidden, hidden);
  c.bn = store.add(prefix + ".bn", hidden, 1, true);
  return c;
}

Var gru_step(Bound& p, const GruCell& cell, Var x, Var h) {
  if (x.rows() != cell.input || x.cols() != 1 || h.rows() != cell.hidden || h.cols() != 1)
    throw ShapeError("gru_step: expected input " + std::to_string(cell.input) + "x1 and state " +
                     std::to_string(cell.hidden) + "x1");
  Var z = sigmoid(affine2(p(cell.wz), x, p(cell.uz), h, p(cell.bz)));
  Var r = sigmoid(affine2(p(cell.wr), x, p(cell.ur), h, p(cell.br)));
  Var n = tanh(affine2(p(cell.wn), x, p(cell.un), mul(r, h), p(cell.bn)));
  return add(n, mul(z, sub(h, n)));
}

std::pair<std::vector<Var>, std::vector<Var>> bigru_layer(Bound& p, const GruCell& fwd, const GruCell& bwd,
                                                          const std::vector<Var>& inputs) {
  const std::size_t n = inputs.size();
  std::vector<Var> f(n), b(n);
  Graph& g = p.graph();
  Var h = g.constant(Matrix::Zero(fwd.hidden, 1));
  for (std::size_t t = 0; t < n; ++t) f[t] = h = gru_step(p, fwd, inputs[t], h);
  h = g.constant(Matrix::Zero(bwd.hidden, 1));
  for (std::size_t t = n; t-- > 0;) b[t] = h = gru_step(p, bwd, inputs[t], h);
  return {std::move(f), std::move(b)};
}

}  // namespace formal::nn
