#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "formal/nn/autodiff.hpp"
#include "formal/nn/gru.hpp"

namespace formal::nn {

struct PredictorConfig {
  int vocab_size = 0;
  int emb_dim = 64;
  int hidden = 128;
  int fc_dim = 64;

  void validate() const;
};

/// Classifies an (X, Y) pair into a control level. X and Y are read by two
/// separate GRUs over a shared embedding table E; the final states are
/// concatenated, passed through relu(W_h h + b_h), then projected to three
/// logits.
class ControlPredictor {
 public:
  ControlPredictor() = default;
  ControlPredictor(const PredictorConfig& cfg, std::uint64_t seed);

  const PredictorConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  /// 3x1 logits for token ids.
  Var logits(Bound& p, std::span<const int> x, std::span<const int> y) const;
  /// Same, with Y given as one distribution per position (vocab x 1 each).
  /// Each position is embedded as E' dist.
  Var logits_soft(Bound& p, std::span<const int> x, const std::vector<Var>& y) const;

  /// Class probabilities for controls 1, 2, 3.
  std::array<double, 3> predict(std::span<const int> x, std::span<const int> y) const;
  std::array<double, 3> predict_soft(std::span<const int> x, const std::vector<Matrix>& y) const;

 private:
  Var encode_ids(Bound& p, const GruCell& cell, std::span<const int> ids) const;
  Var head(Bound& p, Var hx, Var hy) const;

  PredictorConfig cfg_;
  ParamStore params_;
  int embedding_ = -1;
  GruCell x_cell_{}, y_cell_{};
  int wh_ = -1, bh_ = -1, wc_ = -1, bc_ = -1;
};

}  // namespace formal::nn
