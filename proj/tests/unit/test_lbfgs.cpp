#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "hatescan/lbfgs.hpp"
#include "hatescan/linmodels.hpp"
#include "hatescan/random.hpp"

using namespace hatescan;

namespace {

double rosenbrock(std::span<const double> x, std::span<double> g) {
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  g[0] = -2.0 * a - 400.0 * x[0] * b;
  g[1] = 200.0 * b;
  return a * a + 100.0 * b * b;
}

}  // namespace

TEST(Lbfgs, OneDimensionalQuadratic) {
  auto f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2.0 * (x[0] - 3.0);
    return (x[0] - 3.0) * (x[0] - 3.0);
  };
  LbfgsConfig cfg;
  cfg.tol = 1e-10;
  const auto r = lbfgs_minimize(f, {0.0}, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 3.0, 1e-8);
}

TEST(Lbfgs, TwoDimensionalQuadratic) {
  // A = [[4,1],[1,3]], b = [1,2]; A^-1 b = [1/11, 7/11].
  auto f = [](std::span<const double> x, std::span<double> g) {
    g[0] = 4 * x[0] + x[1] - 1;
    g[1] = x[0] + 3 * x[1] - 2;
    return 0.5 * (4 * x[0] * x[0] + 2 * x[0] * x[1] + 3 * x[1] * x[1]) - x[0] - 2 * x[1];
  };
  LbfgsConfig cfg;
  cfg.tol = 1e-10;
  const auto r = lbfgs_minimize(f, {5.0, -5.0}, cfg);
  EXPECT_NEAR(r.x[0], 1.0 / 11.0, 1e-8);
  EXPECT_NEAR(r.x[1], 7.0 / 11.0, 1e-8);
}

TEST(Lbfgs, Rosenbrock) {
  LbfgsConfig cfg;
  cfg.tol = 1e-9;
  cfg.max_iter = 5000;
  const auto r = lbfgs_minimize(rosenbrock, {-1.2, 1.0}, cfg);
  std::vector<double> g(2);
  EXPECT_LT(rosenbrock(r.x, g), 1e-10);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], 1.0, 1e-5);
  EXPECT_DOUBLE_EQ(r.f, rosenbrock(r.x, g));
}

TEST(Lbfgs, AcceptedStepsNeverIncrease) {
  std::vector<double> seen;
  LbfgsConfig cfg;
  cfg.tol = 1e-9;
  cfg.max_iter = 5000;
  std::vector<double> g(2);
  const double f0 = rosenbrock(std::vector<double>{-1.2, 1.0}, g);
  lbfgs_minimize(rosenbrock, {-1.2, 1.0}, cfg, [&](int, double f) { seen.push_back(f); });
  ASSERT_FALSE(seen.empty());
  EXPECT_LE(seen.front(), f0);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LE(seen[i], seen[i - 1]) << i;
}

TEST(Lbfgs, MaxIterIsReported) {
  LbfgsConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 3;
  const auto r = lbfgs_minimize(rosenbrock, {-1.2, 1.0}, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3);
  EXPECT_GT(r.grad_inf_norm, cfg.tol);
}

TEST(Lbfgs, InconsistentGradientFailsLineSearch) {
  // Gradient sign flipped: every proposed step goes uphill.
  auto f = [](std::span<const double> x, std::span<double> g) {
    g[0] = -2.0 * x[0];
    return x[0] * x[0];
  };
  try {
    lbfgs_minimize(f, {1.0}, {});
    FAIL() << "expected LineSearchError";
  } catch (const LineSearchError& e) {
    ASSERT_EQ(e.last_iterate().size(), 1u);
    EXPECT_DOUBLE_EQ(e.last_iterate()[0], 1.0);
    EXPECT_DOUBLE_EQ(e.last_value(), 1.0);
  }
}

TEST(Lbfgs, NonFiniteStartIsError) {
  auto f = [](std::span<const double>, std::span<double> g) {
    g[0] = 0.0;
    return std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_THROW(lbfgs_minimize(f, {0.0}, {}), Error);
}

TEST(Lbfgs, MemoryMustBePositive) {
  LbfgsConfig cfg;
  cfg.memory = 0;
  EXPECT_THROW(lbfgs_minimize(rosenbrock, {0.0, 0.0}, cfg), ParameterError);
}

// Count features summing to a constant per row leave a flat direction whose
// decrease drops below the rounding of f long before the gradient does.
TEST(Lbfgs, ReachesToleranceBelowObjectiveResolution) {
  Rng rng(7);
  std::vector<SparseVector> X;
  std::vector<int> y;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(20, 0.0);
    bool marked = false;
    for (int k = 0; k < 15; ++k) {
      const auto j = rng.below(20);
      x[j] += 1;
      marked = marked || j == 19;
    }
    X.push_back(SparseVector::from_dense(x));
    y.push_back(marked != (i % 7 == 0) ? 1 : -1);
  }
  auto f = [&](std::span<const double> p, std::span<double> g) { return logreg_objective(X, y, 0.1, true, p, g); };
  std::vector<double> seen;
  LbfgsConfig cfg;
  cfg.tol = 1e-6;
  const auto r = lbfgs_minimize(f, std::vector<double>(21, 0.0), cfg, [&](int, double v) { seen.push_back(v); });
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.grad_inf_norm, 1e-6);
  EXPECT_LT(r.iterations, 200);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LE(seen[i], seen[i - 1] * (1 + 1e-12)) << i;
}
