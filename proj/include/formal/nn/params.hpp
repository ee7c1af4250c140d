#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "formal/rng.hpp"

namespace formal::nn {

using Matrix = Eigen::MatrixXd;

/// A trainable tensor and its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool is_bias = false;
};

/// Owns parameters in declaration order. That order is the checkpoint and
/// optimizer order, so it must not depend on anything but the model config.
class ParamStore {
 public:
  int add(std::string name, Eigen::Index rows, Eigen::Index cols, bool is_bias = false);

  Parameter& operator[](int i) { return params_[static_cast<std::size_t>(i)]; }
  const Parameter& operator[](int i) const { return params_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(params_.size()); }
  int find(const std::string& name) const;  // -1 when absent

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  /// Weights ~ U(-scale, scale), biases zero.
  void init_uniform(Rng& rng, double scale = 0.08);
  void zero_grad();
  std::size_t num_values() const;
  /// FNV-1a over names, shapes and raw value bytes.
  std::uint64_t hash() const;
  /// Global L2 norm of all gradients.
  double grad_norm() const;
  /// Rescales gradients so their global norm is at most max_norm. Returns the
  /// norm before clipping.
  double clip_grad_norm(double max_norm);

  /// Copies values from a store with identical layout.
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<Parameter> params_;
};

}  // namespace formal::nn
