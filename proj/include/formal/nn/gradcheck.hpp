#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "formal/nn/autodiff.hpp"

namespace formal::nn {

inline constexpr double kGradCheckEps = 1e-5;
inline constexpr double kGradCheckTolerance = 1e-4;
/// Denominator floor of the relative error, so gradients that are zero up
/// to rounding are compared absolutely.
inline constexpr double kGradCheckFloor = 1e-5;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "name[i,j]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, kGradCheckFloor).
double relative_error(double analytic, double numeric);

/// Builds a scalar loss on a fresh graph. All parameters of every store must
/// be bound trainable through the supplied Bound objects, in order.
using LossBuilder = std::function<Var(Graph&, std::vector<Bound>&)>;

/// Central finite differences on every entry of every store, compared with
/// one backward pass.
GradCheckResult check_gradients(const std::vector<ParamStore*>& stores, const LossBuilder& loss,
                                double eps = kGradCheckEps);

struct ModelCheckConfig {
  int vocab = 20;
  int hidden = 8;
  int control_dim = 4;
  double lambda = 0.1;
  double tau = 0.001;
  std::uint64_t seed = 1;
};

/// Tiny generator + predictor; composite loss on one random triple, checked
/// over the parameters of both networks.
GradCheckResult check_full_model(const ModelCheckConfig& cfg);

}  // namespace formal::nn
