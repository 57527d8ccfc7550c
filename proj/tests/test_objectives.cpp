#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "heavyball/objectives.hpp"

using namespace heavyball;

namespace {

Vector p2(double x, double y) { return Eigen::Vector2d(x, y); }

}  // namespace

TEST(XyObjective, ValuesAndGradients) {
  const Objective f = xy_objective();
  EXPECT_EQ(f.dimension, 2);
  EXPECT_EQ(f.value(p2(1, 1)), 0.0);
  EXPECT_EQ(f.gradient(p2(1, 1)), p2(0, 0));
  EXPECT_EQ(f.value(p2(0, 0)), 1.0);
  EXPECT_EQ(f.gradient(p2(0, 0)), p2(0, 0));
  EXPECT_EQ(f.value(p2(1, 0)), 1.0);
  EXPECT_EQ(f.gradient(p2(1, 0)), p2(0, -2));
  EXPECT_EQ(f.gradient(p2(1, -1)), p2(4, -4));
  ASSERT_TRUE(f.known_inf);
  EXPECT_EQ(*f.known_inf, 0.0);
  ASSERT_TRUE(f.critical_set);
  EXPECT_EQ(f.critical_set->critical_values, (std::vector<double>{0.0, 1.0}));
}

TEST(XyObjective, LowerBoundAndSwapSymmetry) {
  const Objective f = xy_objective();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng), y = u(rng);
    EXPECT_GE(f.value(p2(x, y)), *f.known_inf);
    const Vector g = f.gradient(p2(x, y)), h = f.gradient(p2(y, x));
    EXPECT_EQ(g[0], h[1]);
    EXPECT_EQ(g[1], h[0]);
  }
}

TEST(Classification, XyCriticalSet) {
  const Objective f = xy_objective();
  EXPECT_EQ(classify_critical_point(f, p2(0, 0), 1e-3), CriticalKind::Origin);
  EXPECT_EQ(classify_critical_point(f, p2(2, 0.5), 1e-3), CriticalKind::Hyperbola);
  EXPECT_EQ(classify_critical_point(f, p2(1, 0), 1e-3), CriticalKind::NotCritical);
  EXPECT_EQ(classify_critical_point(f, p2(1e-4, -1e-4), 1e-3), CriticalKind::Origin);
  EXPECT_THROW(classify_critical_point(quadratic_objective(2), p2(0, 0), 1e-3), UnsupportedObjective);
}

TEST(Registry, LookupAndUnknownNames) {
  for (const auto& name : objective_names()) EXPECT_EQ(make_objective(name).name, name);
  EXPECT_THROW(make_objective("rosenbrock"), UnknownObjective);
  EXPECT_THROW(make_objective("xy", 3), UnknownObjective);
  EXPECT_EQ(make_objective("quadratic", 5).dimension, 5);
}

TEST(Lipschitz, XyRowSumOnReferenceBox) {
  EXPECT_EQ(lipschitz_bound_on_box(xy_objective(), Box::cube(2, -2, 2)), 26.0);
}

TEST(Lipschitz, ConstantObjectiveIsClamped) {
  const Objective c = constant_objective(3, 1.5);
  EXPECT_EQ(lipschitz_bound_on_box(c, Box::cube(3, -1, 1)), 1.0);
  EXPECT_EQ(lipschitz_bound_on_box(c, Box::cube(3, -1, 1), 2.5), 2.5);
}

TEST(Lipschitz, ShrinkingBoxAroundOrigin) {
  const Objective f = xy_objective();
  double prev = std::numeric_limits<double>::infinity();
  for (double w : {1.0, 0.1, 0.01, 1e-4}) {
    const double L = lipschitz_bound_on_box(f, Box::cube(2, -w, w));
    EXPECT_LE(L, prev);
    prev = L;
  }
  EXPECT_NEAR(prev, 2.0, 1e-6);
}

TEST(Lipschitz, MonotoneUnderBoxInclusion) {
  const Objective f = xy_objective();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3), grow(0, 1);
  for (int i = 0; i < 200; ++i) {
    Box inner;
    inner.expand(p2(u(rng), u(rng)));
    inner.expand(p2(u(rng), u(rng)));
    Box outer = inner;
    outer.expand(inner.lower - p2(grow(rng), grow(rng)));
    outer.expand(inner.upper + p2(grow(rng), grow(rng)));
    ASSERT_TRUE(outer.contains(inner));
    EXPECT_LE(lipschitz_bound_on_box(f, inner), lipschitz_bound_on_box(f, outer) + 1e-12);
  }
}

TEST(Lipschitz, SampledFallbackWithoutAnalyticBound) {
  Objective q = quadratic_objective(2);
  q.hessian_bound = nullptr;
  EXPECT_NEAR(lipschitz_bound_on_box(q, Box::cube(2, -1, 1)), 1.25, 1e-6);
  Objective f = xy_objective();
  f.hessian_bound = nullptr;
  const double sampled = lipschitz_bound_on_box(f, Box::cube(2, -2, 2));
  // spectral max on [-2,2]^2 is at a corner: |[[8, -18], [-18, 8]]| = 26
  EXPECT_NEAR(sampled, 1.25 * 26.0, 1e-3);
}

TEST(Lipschitz, RejectsBadBoxes) {
  EXPECT_THROW(lipschitz_bound_on_box(xy_objective(), Box::cube(3, -1, 1)), std::invalid_argument);
  EXPECT_THROW(lipschitz_bound_on_box(xy_objective(), Box{p2(1, 1), p2(0, 0)}), std::invalid_argument);
}

TEST(GradientCheck, XyMatchesFiniteDifferences) {
  EXPECT_LE(check_gradient(xy_objective(), Box::cube(2, -2, 2), 100), 1e-6);
  EXPECT_LE(check_gradient(quadratic_objective(4), Box::cube(4, -3, 3), 100), 1e-6);
}

TEST(GradientCheck, ConstantObjectiveIsZero) {
  EXPECT_EQ(check_gradient(constant_objective(2, 3.0), Box::cube(2, -1, 1), 50), 0.0);
}

TEST(GradientCheck, SignFlipIsDetected) {
  Objective f = xy_objective();
  const auto g = f.gradient;
  f.gradient = [g](const Vector& p) { return Vector(-g(p)); };
  EXPECT_NEAR(check_gradient(f, Box::cube(2, -2, 2), 100), 2.0, 1e-5);
}

TEST(GradientCheck, SamplesMustBePositive) {
  EXPECT_THROW(check_gradient(xy_objective(), Box::cube(2, -1, 1), 0), std::invalid_argument);
}

TEST(BoxExtrema, XyReferenceBox) {
  const BoxExtrema e = sample_box_extrema(xy_objective(), Box::cube(2, -2, 2));
  EXPECT_EQ(e.sup_f, 25.0);
  EXPECT_GE(e.inf_f, 0.0);
  EXPECT_LT(e.inf_f, 1e-2);
  EXPECT_NEAR(e.sup_grad, std::sqrt(800.0), 1e-12);
}
