#pragma once

#include <cstdint>
#include <vector>

#include "formal/nn/params.hpp"

namespace formal::nn {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

/// Adam with bias correction. Moments are allocated on the first step and
/// tied to the store layout from then on.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  /// Applies one update from the gradients currently held in `store`.
  /// Throws ShapeError if the layout differs from earlier steps.
  void step(ParamStore& store);

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace formal::nn
