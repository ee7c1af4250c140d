#include <gtest/gtest.h>

#include <cmath>

#include "formal/error.hpp"
#include "formal/nn/autodiff.hpp"
#include "formal/nn/gradcheck.hpp"
#include "primitive_checks.hpp"

using namespace formal;
using namespace formal::nn;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * uniform_real(rng);
  return m;
}

}  // namespace

TEST(Primitives, FiniteDifferences) {
  for (const auto& [name, err] : toy::check_primitives()) EXPECT_LT(err, 1e-4) << name;
}

TEST(Primitives, SingleLinearLayerIsNearExact) { EXPECT_LT(toy::check_linear_layer(), 1e-7); }

TEST(Primitives, SoftmaxSumsToOne) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    Graph g;
    Var s = softmax(g.constant(random_matrix(rng, 1 + uniform_index(rng, 30), 1, -50, 50)));
    EXPECT_NEAR(s.value().sum(), 1.0, 1e-9);
    EXPECT_GE(s.value().minCoeff(), 0.0);
  }
}

TEST(Primitives, ReluSubgradient) {
  ParamStore store;
  int a = store.add("a", 3, 1);
  store[a].value << 2.0, -1.0, 0.0;
  Graph g;
  Bound p(g, store);
  store.zero_grad();
  g.backward(sum(relu(p(a))));
  EXPECT_EQ(store[a].grad(0, 0), 1.0);
  EXPECT_EQ(store[a].grad(1, 0), 0.0);
  EXPECT_EQ(store[a].grad(2, 0), 0.0);
}

TEST(Primitives, ShapeErrorsNameTheOp) {
  Graph g;
  Var a = g.constant(Matrix::Zero(2, 3)), b = g.constant(Matrix::Zero(2, 3));
  try {
    matmul(a, b);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
  }
  EXPECT_THROW(add(a, g.constant(Matrix::Zero(3, 2))), ShapeError);
  EXPECT_THROW(cross_entropy(g.constant(Matrix::Zero(3, 1)), 3), ShapeError);
  EXPECT_THROW(row(a, 5), ShapeError);
  EXPECT_THROW(g.backward(a), ShapeError);
  EXPECT_THROW(softmax_temperature(a, 0.0), InputError);
}

TEST(Primitives, FrozenLeavesGetNoGradient) {
  ParamStore store;
  int w = store.add("w", 2, 2), x = store.add("x", 2, 1);
  store[w].value.setConstant(0.5);
  store[x].value.setConstant(1.0);
  store.zero_grad();
  Graph g;
  Var wv = g.param(static_cast<const Parameter&>(store[w]));
  Var xv = g.param(store[x], true);
  g.backward(sum(matmul(wv, xv)));
  EXPECT_EQ(store[w].grad.norm(), 0.0);
  EXPECT_NEAR(store[x].grad(0, 0), 1.0, 1e-12);
}

TEST(GradCheck, RelativeErrorFloor) {
  EXPECT_NEAR(relative_error(1.0, 1.1), 0.1 / 1.1, 1e-15);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-9), 1e-9 / kGradCheckFloor);
}

TEST(GradCheck, FullModelPasses) {
  GradCheckResult r = check_full_model({});
  EXPECT_LT(r.max_rel_error, kGradCheckTolerance) << r.worst;
  EXPECT_GT(r.checked, 1000u);
}

TEST(GradCheck, FullModelAtUnitTemperatureAndLambdaBounds) {
  for (double lambda : {0.0, 0.5, 1.0}) {
    ModelCheckConfig cfg;
    cfg.tau = 1.0;
    cfg.lambda = lambda;
    cfg.seed = 3;
    GradCheckResult r = check_full_model(cfg);
    EXPECT_LT(r.max_rel_error, kGradCheckTolerance) << "lambda " << lambda << " " << r.worst;
  }
}

TEST(GradCheck, Deterministic) {
  ModelCheckConfig cfg;
  cfg.seed = 2;
  EXPECT_EQ(check_full_model(cfg).max_rel_error, check_full_model(cfg).max_rel_error);
}
