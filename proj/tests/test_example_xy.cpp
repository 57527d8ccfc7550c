#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "heavyball/example_xy.hpp"

using namespace heavyball;
using namespace heavyball::xy;

namespace {

ode::Trajectory<double> run_heavy_ball(const ExampleInit& init, double T) {
  const HeavyBallProblem p = init.heavy_ball();
  ode::IntegratorConfig<double> cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.t_end = T;
  return ode::integrate(heavy_ball_field(p), p.initial_state(), heavy_ball_config(p, cfg));
}

}  // namespace

TEST(Envelope, ReferenceConstants) {
  // tests/oracles/closed_forms.py, envelope(a=1, b=0.1, gamma=0.5, eps=0.01)
  const EnvelopeSet e = envelope_constants(ExampleInit{});
  EXPECT_NEAR(e.c1, 0.0037139067635410373, 1e-14);
  EXPECT_NEAR(e.r1, 1.9258240356725202, 1e-12);
  EXPECT_NEAR(e.r2, -51.92582403567252, 1e-11);
  EXPECT_NEAR(e.c2, 0.091089451179961906, 1e-13);
  EXPECT_NEAR(e.r3, -2.0871215252208, 1e-12);
  EXPECT_NEAR(e.r4, -47.9128784747792, 1e-11);
  EXPECT_NEAR(e.c3, 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(e.r5, -10.0, 1e-12);
  EXPECT_NEAR(e.r6, -40.0, 1e-12);
}

TEST(Envelope, EnvelopesMatchInitialData) {
  const ExampleInit init{};
  const EnvelopeSet e = envelope_constants(init);
  EXPECT_NEAR(e.lower_u(0.0), 0.0, 1e-15);
  EXPECT_NEAR(e.upper_v(0.0), 2.0 * init.a, 1e-14);
  EXPECT_NEAR(e.lower_v(0.0), 2.0 * init.a, 1e-14);
  for (double t = 0.01; t < 1.0; t += 0.01) EXPECT_LE(e.lower_v(t), e.upper_v(t) + 1e-12);
}

TEST(Envelope, ThresholdMessage) {
  ExampleInit init{};
  init.epsilon = 0.02;
  try {
    envelope_constants(init);
    FAIL() << "expected EpsilonTooLarge";
  } catch (const EpsilonTooLarge& e) {
    EXPECT_STREQ(e.what(), "epsilon exceeds γ²/(8a²+8)=0.015625 for a=1, γ=0.5");
  }
  init.epsilon = init.epsilon_threshold();
  EXPECT_THROW(envelope_constants(init), EpsilonTooLarge);
  init.epsilon = std::nextafter(init.epsilon_threshold(), 0.0);
  EXPECT_NO_THROW(envelope_constants(init));
}

TEST(Envelope, LowerVInitialSlopeIdentity) {
  // (2a + c3) r5 = c3 r6, i.e. the lower v envelope starts with zero slope
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(0.1, 3.0), ub(0.01, 1.0), ug(0.05, 2.0), uf(0.01, 0.99);
  for (int i = 0; i < 100; ++i) {
    ExampleInit init{ua(rng), ub(rng), ug(rng), 0.0};
    init.epsilon = uf(rng) * init.epsilon_threshold();
    const EnvelopeSet e = envelope_constants(init);
    const double lhs = (2 * init.a + e.c3) * e.r5, rhs = e.c3 * e.r6;
    EXPECT_NEAR(lhs, rhs, 1e-9 * (1 + std::abs(rhs)));
  }
}

TEST(Envelope, InvalidInit) {
  EXPECT_THROW(envelope_constants(ExampleInit{0.0, 0.1, 0.5, 0.01}), std::invalid_argument);
  EXPECT_THROW(envelope_constants(ExampleInit{1.0, 0.1, -0.5, 0.01}), std::invalid_argument);
  EXPECT_THROW(envelope_constants(ExampleInit{1.0, 0.1, 0.5, 0.0}), std::invalid_argument);
}

TEST(Degenerate, ClosedForm) {
  EXPECT_EQ(degenerate_closed_form(1.0, 0.5, 0.0), Eigen::Vector2d(1.0, -1.0));
  // tests/oracles/closed_forms.py, degenerate(1, 0.5, 1)
  const Eigen::Vector2d p = degenerate_closed_form(1.0, 0.5, 1.0);
  EXPECT_NEAR(p[0], 0.012952198750198576, 1e-15);
  EXPECT_EQ(p[1], -p[0]);
  const Eigen::Vector2d far = degenerate_closed_form(1.0, 0.5, 1e4);
  EXPECT_TRUE(far.allFinite());
  EXPECT_EQ(far.norm(), 0.0);
}

TEST(Degenerate, ClosedFormMatchesIntegration) {
  const GradientFlowProblem p{0.5, Eigen::Vector2d(1, -1), xy_objective()};
  ode::IntegratorConfig<double> cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.t_end = 5.0;
  const auto traj = ode::integrate(gradient_flow_field(p), p.x0, cfg);
  for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const Eigen::Vector2d x = traj(t);
    EXPECT_NEAR((x - degenerate_closed_form(1.0, 0.5, t)).norm(), 0.0, 1e-10) << t;
    EXPECT_NEAR(conserved_quantity(x[0], x[1]), 0.0, 1e-12);
  }
  EXPECT_FALSE(crossing_time(traj).has_value());
}

TEST(Transform, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector4d s(u(rng), u(rng), u(rng), u(rng));
    EXPECT_NEAR((uv_inverse(uv_transform(s)) - s).norm(), 0.0, 1e-14);
  }
  const Eigen::Vector4d uv = uv_transform(Eigen::Vector4d(1, -1, 0.1, 0.1));
  EXPECT_EQ(uv, Eigen::Vector4d(0, 2, 0.2, 0));
}

TEST(Transform, ConservedQuantity) {
  EXPECT_EQ(conserved_quantity(2.0, 1.0), 3.0);
  EXPECT_EQ(conserved_quantity(1.0, -1.0), 0.0);
}

TEST(Claims, DefaultRun) {
  const ExampleInit init{};
  const auto traj = run_heavy_ball(init, 10.0);
  const auto report = claims_check(traj, init, envelope_constants(init), 1e-6);
  ASSERT_TRUE(report.t_eps.has_value());
  EXPECT_NEAR(*report.t_eps, 1.6200531383976453, 1e-6);
  EXPECT_NEAR(report.window_end, *report.t_eps, 1e-12);
  const Eigen::Vector4d at = traj(*report.t_eps);
  EXPECT_NEAR(at[0] * at[1], 0.5, 1e-10);
  EXPECT_TRUE(report.all_hold());
  EXPECT_GT(report.claim1.samples, 1000u);
  EXPECT_LE(report.claim1.max_violation, 1e-6);
  EXPECT_FALSE(report.claim3.first_violation.has_value());
}

TEST(Claims, CrossingAtStartIsAnEmptyWindow) {
  const ExampleInit init{};
  const HeavyBallProblem p{0.01, 0.5, Eigen::Vector2d(1.0, 0.5), Eigen::Vector2d(0.1, 0.1), xy_objective()};
  ode::IntegratorConfig<double> cfg;
  cfg.t_end = 1.0;
  const auto traj = ode::integrate(heavy_ball_field(p), p.initial_state(), heavy_ball_config(p, cfg));
  EXPECT_THROW(claims_check(traj, init, envelope_constants(init), 1e-6), EmptyWindow);
}

TEST(Claims, EpsilonTooLargeIsRejected) {
  ExampleInit init{};
  const auto traj = run_heavy_ball(init, 2.0);
  const EnvelopeSet env = envelope_constants(init);
  init.epsilon = 0.02;
  EXPECT_THROW(claims_check(traj, init, env, 1e-6), EpsilonTooLarge);
}
