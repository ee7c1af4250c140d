#include "formal/nn/loss.hpp"

#include "formal/error.hpp"
#include "formal/text.hpp"

namespace formal::nn {

Var sequence_cross_entropy(const std::vector<Var>& logits, std::span<const int> targets) {
  std::vector<Var> terms;
  const std::size_t n = std::min(logits.size(), targets.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] == Vocabulary::kPad) continue;
    terms.push_back(cross_entropy(logits[i], targets[i]));
  }
  if (terms.empty()) throw InputError("sequence_cross_entropy: no scored positions");
  return scale(add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

Var composite_loss(Var l1, Var l2, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("composite_loss: lambda must be in [0, 1]");
  if (lambda == 0.0) {
    if (!l1.graph) throw InputError("composite_loss: missing L1");
    return l1;
  }
  if (lambda == 1.0) {
    if (!l2.graph) throw InputError("composite_loss: missing L2");
    return l2;
  }
  if (!l1.graph || !l2.graph) throw InputError("composite_loss: missing term");
  return add(scale(l2, lambda), scale(l1, 1.0 - lambda));
}

std::vector<Var> soft_output(const std::vector<Var>& logits, double tau) {
  if (!(tau > 0.0)) throw InputError("soft_output: tau must be positive");
  std::vector<Var> out;
  out.reserve(logits.size());
  for (const Var& l : logits) out.push_back(softmax_temperature(l, tau));
  return out;
}

ExploitTerms exploitation_loss(Bound& gen, Bound& pred, const Seq2Seq& model, const ControlPredictor& predictor,
                               std::span<const int> x, std::span<const int> y, int control, double lambda,
                               double tau) {
  if (y.empty()) throw InputError("exploitation_loss: empty target");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("composite_loss: lambda must be in [0, 1]");
  Seq2Seq::Encoding enc = model.encode(gen, x);
  std::vector<Var> logits = model.teacher_forced(gen, enc, y, control);
  std::vector<int> targets(y.begin(), y.end());
  targets.push_back(Vocabulary::kEos);
  ExploitTerms t;
  t.l1 = sequence_cross_entropy(logits, targets);
  if (lambda > 0.0) {
    std::vector<Var> head(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(y.size()));
    t.l2 = cross_entropy(predictor.logits_soft(pred, x, soft_output(head, tau)), control_row(control));
  }
  t.loss = composite_loss(t.l1, t.l2, lambda);
  return t;
}

}  // namespace formal::nn
