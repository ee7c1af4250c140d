#include "formal/nn/adam.hpp"

#include <cmath>

#include "formal/error.hpp"

namespace formal::nn {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("adam: betas must be in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam: eps must be positive");
}

void Adam::step(ParamStore& store) {
  const auto n = static_cast<std::size_t>(store.size());
  if (m_.empty()) {
    for (const Parameter& p : store) {
      m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  if (m_.size() != n) throw ShapeError("adam: parameter count changed");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < n; ++i) {
    Parameter& p = store[static_cast<int>(i)];
    if (p.value.rows() != m_[i].rows() || p.value.cols() != m_[i].cols())
      throw ShapeError("adam: shape mismatch for " + p.name);
    if (p.grad.size() == 0) continue;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols())
      throw ShapeError("adam: gradient shape mismatch for " + p.name);
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= cfg_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.eps);
  }
}

}  // namespace formal::nn
