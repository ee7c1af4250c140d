#pragma once

#include <span>
#include <vector>

#include "formal/nn/autodiff.hpp"
#include "formal/nn/predictor.hpp"
#include "formal/nn/seq2seq.hpp"

namespace formal::nn {

inline constexpr double kDefaultLambda = 0.1;
inline constexpr double kDefaultTau = 0.001;

/// Mean token cross entropy of `logits[i]` against `targets[i]`. Logits beyond
/// the target length are ignored; PAD targets are masked out. Throws
/// InputError when no position is scored.
Var sequence_cross_entropy(const std::vector<Var>& logits, std::span<const int> targets);

/// lambda * l2 + (1 - lambda) * l1. Either term may be omitted (invalid Var)
/// when its weight is zero.
Var composite_loss(Var l1, Var l2, double lambda);

/// Relaxed one-hot: softmax(logits / tau) per position.
std::vector<Var> soft_output(const std::vector<Var>& logits, double tau);

struct ExploitTerms {
  Var loss;
  Var l1;
  Var l2;  // invalid when lambda == 0
};

/// Loss for one triple. The decoder is teacher-forced on y under control c;
/// L1 is the token cross entropy of those logits against y + EOS. The first
/// |y| steps, relaxed with temperature tau, are read by the predictor in
/// place of Y, and L2 is its cross entropy against c. Predictor parameters
/// are bound through `pred`, so freezing is decided by the caller.
ExploitTerms exploitation_loss(Bound& gen, Bound& pred, const Seq2Seq& model, const ControlPredictor& predictor,
                               std::span<const int> x, std::span<const int> y, int control, double lambda,
                               double tau);

}  // namespace formal::nn
