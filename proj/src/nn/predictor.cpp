#include "formal/nn/predictor.hpp"

#include <cmath>
#include <string>

#include "formal/error.hpp"

namespace formal::nn {

void PredictorConfig::validate() const {
  if (vocab_size <= 0) throw ConfigError("predictor: empty vocabulary");
  if (emb_dim <= 0 || hidden <= 0 || fc_dim <= 0) throw ConfigError("predictor: dimensions must be positive");
}

ControlPredictor::ControlPredictor(const PredictorConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  embedding_ = params_.add("predictor.embedding", cfg.vocab_size, cfg.emb_dim);
  x_cell_ = GruCell::declare(params_, "predictor.x", cfg.emb_dim, cfg.hidden);
  y_cell_ = GruCell::declare(params_, "predictor.y", cfg.emb_dim, cfg.hidden);
  wh_ = params_.add("predictor.W_h", cfg.fc_dim, 2 * cfg.hidden);
  bh_ = params_.add("predictor.b_h", cfg.fc_dim, 1, true);
  wc_ = params_.add("predictor.W_c", 3, cfg.fc_dim);
  bc_ = params_.add("predictor.b_c", 3, 1, true);
  Rng rng(seed);
  params_.init_uniform(rng);
}

Var ControlPredictor::encode_ids(Bound& p, const GruCell& cell, std::span<const int> ids) const {
  if (ids.empty()) throw InputError("predictor: empty sequence");
  Var h = p.graph().constant(Matrix::Zero(cfg_.hidden, 1));
  for (int id : ids) {
    if (id < 0 || id >= cfg_.vocab_size) throw ShapeError("predictor: id " + std::to_string(id) + " out of range");
    h = gru_step(p, cell, row(p(embedding_), id), h);
  }
  return h;
}

Var ControlPredictor::head(Bound& p, Var hx, Var hy) const {
  Var hf = relu(affine(p(wh_), vcat({hx, hy}), p(bh_)));
  return affine(p(wc_), hf, p(bc_));
}

Var ControlPredictor::logits(Bound& p, std::span<const int> x, std::span<const int> y) const {
  return head(p, encode_ids(p, x_cell_, x), encode_ids(p, y_cell_, y));
}

Var ControlPredictor::logits_soft(Bound& p, std::span<const int> x, const std::vector<Var>& y) const {
  if (y.empty()) throw InputError("predictor: empty sequence");
  Var hy = p.graph().constant(Matrix::Zero(cfg_.hidden, 1));
  for (const Var& dist : y) {
    if (dist.rows() != cfg_.vocab_size || dist.cols() != 1) throw ShapeError("predictor: distribution size");
    hy = gru_step(p, y_cell_, matmul_tn(p(embedding_), dist), hy);
  }
  return head(p, encode_ids(p, x_cell_, x), hy);
}

namespace {
std::array<double, 3> probs(Var logits) {
  Matrix v = softmax(logits).value();
  return {v(0, 0), v(1, 0), v(2, 0)};
}
}  // namespace

std::array<double, 3> ControlPredictor::predict(std::span<const int> x, std::span<const int> y) const {
  Graph g;
  Bound p(g, params_);
  return probs(logits(p, x, y));
}

std::array<double, 3> ControlPredictor::predict_soft(std::span<const int> x, const std::vector<Matrix>& y) const {
  Graph g;
  Bound p(g, params_);
  std::vector<Var> rows;
  for (const Matrix& m : y) {
    if (m.cols() == 1 && std::abs(m.sum() - 1.0) > 1e-6) throw InputError("predictor: soft row does not sum to 1");
    rows.push_back(g.constant(m));
  }
  return probs(logits_soft(p, x, rows));
}

}  // namespace formal::nn
