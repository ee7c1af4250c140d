#include "formal/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "formal/nn/loss.hpp"
#include "formal/nn/predictor.hpp"
#include "formal/nn/seq2seq.hpp"
#include "formal/text.hpp"

namespace formal::nn {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const std::vector<ParamStore*>& stores, const LossBuilder& loss) {
  Graph g;
  std::vector<Bound> bound;
  for (ParamStore* s : stores) bound.emplace_back(g, *s, false);
  return loss(g, bound).scalar();
}

}  // namespace

GradCheckResult check_gradients(const std::vector<ParamStore*>& stores, const LossBuilder& loss, double eps) {
  for (ParamStore* s : stores) s->zero_grad();
  {
    Graph g;
    std::vector<Bound> bound;
    for (ParamStore* s : stores) bound.emplace_back(g, *s, true);
    g.backward(loss(g, bound));
  }
  GradCheckResult r;
  for (ParamStore* s : stores) {
    for (Parameter& p : *s) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
          const double orig = p.value(i, j);
          p.value(i, j) = orig + eps;
          const double up = evaluate(stores, loss);
          p.value(i, j) = orig - eps;
          const double down = evaluate(stores, loss);
          p.value(i, j) = orig;
          const double numeric = (up - down) / (2.0 * eps);
          const double err = relative_error(p.grad(i, j), numeric);
          ++r.checked;
          if (err > r.max_rel_error || r.worst.empty()) {
            r.max_rel_error = err;
            r.worst = p.name + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
            r.worst_analytic = p.grad(i, j);
            r.worst_numeric = numeric;
          }
        }
      }
    }
  }
  return r;
}

GradCheckResult check_full_model(const ModelCheckConfig& cfg) {
  Seq2SeqConfig mc;
  mc.vocab_size = cfg.vocab;
  mc.emb_dim = cfg.hidden;
  mc.enc_hidden = cfg.hidden;
  mc.dec_hidden = cfg.hidden;
  mc.attn_dim = cfg.hidden;
  mc.control_dim = cfg.control_dim;
  Seq2Seq model(mc, derive_seed(cfg.seed, "gradcheck.model"));
  PredictorConfig pc;
  pc.vocab_size = cfg.vocab;
  pc.emb_dim = cfg.hidden;
  pc.hidden = cfg.hidden;
  pc.fc_dim = cfg.hidden;
  ControlPredictor predictor(pc, derive_seed(cfg.seed, "gradcheck.predictor"));

  // Wider than the training init, biases included, so no term sits in a
  // near-linear or all-zero regime.
  Rng rng(derive_seed(cfg.seed, "gradcheck.init"));
  for (ParamStore* s : {&model.params(), &predictor.params()})
    for (Parameter& p : *s)
      for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = uniform_real(rng) - 0.5;

  Rng data(derive_seed(cfg.seed, "gradcheck.data"));
  auto word = [&] { return Vocabulary::kNumSpecials + static_cast<int>(uniform_index(data, static_cast<std::size_t>(cfg.vocab - Vocabulary::kNumSpecials))); };
  std::vector<int> x, y;
  for (int i = 0; i < 4; ++i) x.push_back(word());
  for (int i = 0; i < 3; ++i) y.push_back(word());
  const int control = 1 + static_cast<int>(uniform_index(data, 3));

  return check_gradients({&model.params(), &predictor.params()}, [&](Graph&, std::vector<Bound>& b) {
    return exploitation_loss(b[0], b[1], model, predictor, x, y, control, cfg.lambda, cfg.tau).loss;
  });
}

}  // namespace formal::nn
