#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "heavyball/dynamics.hpp"
#include "heavyball/ode.hpp"

namespace heavyball::xy {

/// Initial data x0 = (a, -a), v0 = (b, b) for f(x, y) = (xy - 1)^2.
struct ExampleInit {
  double a = 1.0;
  double b = 0.1;
  double gamma = 0.5;
  double epsilon = 0.01;

  void validate() const;
  Vector x0() const { return Eigen::Vector2d(a, -a); }
  Vector v0() const { return Eigen::Vector2d(b, b); }
  /// gamma^2 / (8 a^2 + 8): below it the envelope constants are real and a
  /// crossing of xy = 1/2 is guaranteed.
  double epsilon_threshold() const { return gamma * gamma / (8.0 * a * a + 8.0); }

  HeavyBallProblem heavy_ball() const;
  GradientFlowProblem gradient_flow() const;
};

class EpsilonTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyWindow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact gradient-flow solution from (a, -a):
///   x(t) = c / sqrt(exp(4t/gamma) - c^2), y = -x, c = a / sqrt(1 + a^2),
/// evaluated as a e^{-2t/gamma} / sqrt(1 - a^2 expm1(-4t/gamma)) so that t = 0
/// returns (a, -a) exactly and large t does not overflow.
Eigen::Vector2d degenerate_closed_form(double a, double gamma, double t);

/// (x, y, x', y') -> (u, v, u', v') with u = x + y, v = x - y.
Eigen::Vector4d uv_transform(const Eigen::Vector4d& state);
Eigen::Vector4d uv_inverse(const Eigen::Vector4d& uv);

/// x^2 - y^2 (conserved by the gradient flow).
double conserved_quantity(double x, double y);

enum class BoundKind { LowerU, UpperV, LowerV };

/// Comparison-solution envelopes for u = x + y and v = x - y:
///   u(t) >= c1 (e^{r1 t} - e^{r2 t})
///   v(t) <= (2a + c2) e^{r3 t} - c2 e^{r4 t}
///   v(t) >= (2a + c3) e^{r5 t} - c3 e^{r6 t}
struct EnvelopeSet {
  double a = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0, r5 = 0.0, r6 = 0.0;
  double valid_until = std::numeric_limits<double>::infinity();

  static constexpr BoundKind kinds[3] = {BoundKind::LowerU, BoundKind::UpperV, BoundKind::LowerV};

  double lower_u(double t) const;
  double upper_v(double t) const;
  double lower_v(double t) const;
};

/// Throws EpsilonTooLarge unless eps < gamma^2 / (8a^2 + 8).
EnvelopeSet envelope_constants(const ExampleInit& init);

/// First time with x(t) y(t) = threshold on a trajectory whose first two
/// components are (x, y).
std::optional<double> crossing_time(const ode::Trajectory<double>& traj, double threshold = 0.5);

struct ClaimVerdict {
  std::string name;
  bool holds = true;
  double max_violation = 0.0;  // largest amount by which the inequality fails (<= 0 when it holds)
  std::optional<double> first_violation;
  std::size_t samples = 0;
};

struct ClaimsReport {
  double window_end = 0.0;
  std::optional<double> t_eps;  // first x y = 1/2
  std::optional<double> T1;     // first u' = 0
  std::optional<double> T2;     // first v = 0
  std::optional<double> T3;     // first v' = 0 after t = 0
  double tol = 0.0;
  ClaimVerdict claim1;  // u >= lower envelope
  ClaimVerdict claim3;  // v' < 0
  ClaimVerdict claim4;  // v <= upper envelope
  ClaimVerdict claim5;  // v >= lower envelope
  ClaimVerdict xy_monotone;
  ClaimVerdict u_monotone;

  bool all_hold() const {
    return claim1.holds && claim3.holds && claim4.holds && claim5.holds && xy_monotone.holds && u_monotone.holds;
  }
};

/// Checks the envelope claims on [0, min(t_eps, T1, T2, end)] at dense samples
/// spaced at most 1e-3 apart, with additive slack `tol`. Throws EmptyWindow when
/// the crossing happens at t = 0.
ClaimsReport claims_check(const ode::Trajectory<double>& traj, const ExampleInit& init, const EnvelopeSet& env,
                          double tol);

}  // namespace heavyball::xy
