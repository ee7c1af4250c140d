#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "formal/nn/autodiff.hpp"

namespace formal::nn {

/// Parameter indices of one GRU layer:
///   z  = sigmoid(Wz x + Uz h + bz)
///   r  = sigmoid(Wr x + Ur h + br)
///   n  = tanh(Wn x + Un (r * h) + bn)
///   h' = (1 - z) * n + z * h
struct GruCell {
  int wz, uz, bz;
  int wr, ur, br;
  int wn, un, bn;
  int input = 0;
  int hidden = 0;

  static GruCell declare(ParamStore& store, const std::string& prefix, int input, int hidden);
};

Var gru_step(Bound& p, const GruCell& cell, Var x, Var h);

/// Runs one bidirectional layer. Returns (forward states, backward states),
/// both indexed by input position.
std::pair<std::vector<Var>, std::vector<Var>> bigru_layer(Bound& p, const GruCell& fwd, const GruCell& bwd,
                                                          const std::vector<Var>& inputs);

}  // namespace formal::nn
