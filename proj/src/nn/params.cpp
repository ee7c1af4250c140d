#include "formal/nn/params.hpp"

#include <cmath>
#include <cstring>

#include "formal/error.hpp"

namespace formal::nn {

int ParamStore::add(std::string name, Eigen::Index rows, Eigen::Index cols, bool is_bias) {
  if (rows <= 0 || cols <= 0) throw ShapeError("param " + name + ": non-positive shape");
  if (find(name) >= 0) throw ShapeError("param " + name + ": duplicate name");
  Parameter p;
  p.name = std::move(name);
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  p.is_bias = is_bias;
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  return -1;
}

void ParamStore::init_uniform(Rng& rng, double scale) {
  for (auto& p : params_) {
    if (p.is_bias) {
      p.value.setZero();
      continue;
    }
    for (Eigen::Index j = 0; j < p.value.cols(); ++j)
      for (Eigen::Index i = 0; i < p.value.rows(); ++i) p.value(i, j) = (2.0 * uniform_real(rng) - 1.0) * scale;
  }
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

std::size_t ParamStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

std::uint64_t ParamStore::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : params_) {
    h = fnv1a(p.name, h);
    std::int64_t shape[2] = {p.value.rows(), p.value.cols()};
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(shape), sizeof shape), h);
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(p.value.data()),
                               static_cast<std::size_t>(p.value.size()) * sizeof(double)),
              h);
  }
  return h;
}

double ParamStore::grad_norm() const {
  double s = 0;
  for (const auto& p : params_) s += p.grad.squaredNorm();
  return std::sqrt(s);
}

double ParamStore::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (max_norm > 0 && norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& p : params_) p.grad *= f;
  }
  return norm;
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.params_.size() != params_.size()) throw ShapeError("copy_values_from: layout mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (other.params_[i].value.rows() != params_[i].value.rows() ||
        other.params_[i].value.cols() != params_[i].value.cols())
      throw ShapeError("copy_values_from: shape mismatch at " + params_[i].name);
    params_[i].value = other.params_[i].value;
  }
}

}  // namespace formal::nn
