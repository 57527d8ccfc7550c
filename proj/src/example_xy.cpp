#include "heavyball/example_xy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace heavyball::xy {

void ExampleInit::validate() const {
  if (!(a > 0)) throw std::invalid_argument("a must be positive");
  if (!(b > 0)) throw std::invalid_argument("b must be positive");
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
}

HeavyBallProblem ExampleInit::heavy_ball() const {
  validate();
  return HeavyBallProblem{epsilon, gamma, x0(), v0(), xy_objective()};
}

GradientFlowProblem ExampleInit::gradient_flow() const {
  validate();
  return GradientFlowProblem{gamma, x0(), xy_objective()};
}

Eigen::Vector2d degenerate_closed_form(double a, double gamma, double t) {
  if (!(a > 0) || !(gamma > 0) || !(t >= 0)) {
    throw std::invalid_argument("degenerate_closed_form requires a > 0, gamma > 0, t >= 0");
  }
  const double x = a * std::exp(-2.0 * t / gamma) / std::sqrt(1.0 - a * a * std::expm1(-4.0 * t / gamma));
  return {x, -x};
}

Eigen::Vector4d uv_transform(const Eigen::Vector4d& s) {
  return {s[0] + s[1], s[0] - s[1], s[2] + s[3], s[2] - s[3]};
}

Eigen::Vector4d uv_inverse(const Eigen::Vector4d& uv) {
  return {(uv[0] + uv[1]) / 2.0, (uv[0] - uv[1]) / 2.0, (uv[2] + uv[3]) / 2.0, (uv[2] - uv[3]) / 2.0};
}

double conserved_quantity(double x, double y) { return x * x - y * y; }

double EnvelopeSet::lower_u(double t) const { return c1 * (std::exp(r1 * t) - std::exp(r2 * t)); }

double EnvelopeSet::upper_v(double t) const { return (2.0 * a + c2) * std::exp(r3 * t) - c2 * std::exp(r4 * t); }

double EnvelopeSet::lower_v(double t) const { return (2.0 * a + c3) * std::exp(r5 * t) - c3 * std::exp(r6 * t); }

namespace {

void require_below_threshold(const ExampleInit& init) {
  init.validate();
  if (!(init.epsilon < init.epsilon_threshold())) {
    std::ostringstream os;
    os << "epsilon exceeds γ²/(8a²+8)=" << init.epsilon_threshold() << " for a=" << init.a << ", γ=" << init.gamma;
    throw EpsilonTooLarge(os.str());
  }
}

}  // namespace

EnvelopeSet envelope_constants(const ExampleInit& init) {
  require_below_threshold(init);
  const double a = init.a, b = init.b, g = init.gamma, e = init.epsilon;
  const double s1 = std::sqrt(g * g + 4.0 * e);
  const double s2 = std::sqrt(g * g - 4.0 * e);
  const double k = 4.0 * (a * a + 1.0);
  const double s3 = std::sqrt(g * g - 2.0 * k * e);

  EnvelopeSet env;
  env.a = a;
  env.c1 = 2.0 * b * e / s1;
  env.r1 = 2.0 / (s1 + g);
  env.r2 = -2.0 / (s1 - g);
  env.c2 = a * g / s2 - a;
  env.r3 = -2.0 / (g + s2);
  env.r4 = -2.0 / (g - s2);
  env.c3 = a * g / s3 - a;
  env.r5 = -k / (g + s3);
  env.r6 = -k / (g - s3);
  return env;
}

std::optional<double> crossing_time(const ode::Trajectory<double>& traj, double threshold) {
  ode::EventQuery<double> q;
  q.function = [threshold](double, const Vector& s) { return s[0] * s[1] - threshold; };
  q.direction = ode::Direction::Rising;
  return ode::detect_event(traj, q);
}

namespace {

// Samples [0, end] with spacing <= 1e-3 and records where `margin(t)` < -tol.
template <typename Margin>
ClaimVerdict check_on_window(std::string name, double end, double tol, Margin&& margin) {
  ClaimVerdict v;
  v.name = std::move(name);
  v.max_violation = -std::numeric_limits<double>::infinity();
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(end / 1e-3)));
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = end * static_cast<double>(k) / static_cast<double>(n);
    const double violation = -margin(t);
    v.max_violation = std::max(v.max_violation, violation);
    if (violation > tol && !v.first_violation) v.first_violation = t;
  }
  v.samples = n + 1;
  v.holds = !v.first_violation;
  return v;
}

}  // namespace

ClaimsReport claims_check(const ode::Trajectory<double>& traj, const ExampleInit& init, const EnvelopeSet& env,
                          double tol) {
  if (traj.dimension() != 4) throw std::invalid_argument("claims_check expects (x, y, x', y') trajectories");
  require_below_threshold(init);
  ClaimsReport r;
  r.tol = tol;
  r.t_eps = crossing_time(traj, 0.5);
  if (r.t_eps && *r.t_eps <= 0.0) throw EmptyWindow("x y reaches 1/2 at t = 0; no window to check");

  ode::EventQuery<double> q;
  q.function = [](double, const Vector& s) { return s[2] + s[3]; };
  q.direction = ode::Direction::Falling;
  r.T1 = ode::detect_event(traj, q);
  q.function = [](double, const Vector& s) { return s[0] - s[1]; };
  r.T2 = ode::detect_event(traj, q);
  q.function = [](double, const Vector& s) { return s[2] - s[3]; };
  q.direction = ode::Direction::Rising;
  r.T3 = ode::detect_event(traj, q);

  const double base = r.t_eps ? std::min(*r.t_eps, traj.t_end()) : traj.t_end();
  double end = base;
  if (r.T1) end = std::min(end, *r.T1);
  if (r.T2) end = std::min(end, *r.T2);
  end = std::min(end, env.valid_until);
  r.window_end = end;

  const auto uv = [&](double t) { return uv_transform(Eigen::Vector4d(traj(t))); };

  r.claim1 = check_on_window("claim1_u_lower", end, tol, [&](double t) { return uv(t)[0] - env.lower_u(t); });
  r.claim3 = check_on_window("claim3_vdot_negative", end, tol, [&](double t) { return -uv(t)[3]; });
  r.claim4 = check_on_window("claim4_v_upper", end, tol, [&](double t) { return env.upper_v(t) - uv(t)[1]; });
  r.claim5 = check_on_window("claim5_v_lower", end, tol, [&](double t) { return uv(t)[1] - env.lower_v(t); });

  // x y nondecreasing on the window, compared between consecutive samples.
  {
    double prev = -std::numeric_limits<double>::infinity();
    r.xy_monotone = check_on_window("xy_nondecreasing", end, 1e-9, [&](double t) {
      const Vector s = traj(t);
      const double xy = s[0] * s[1];
      const double m = xy - prev;
      prev = xy;
      return std::isinf(m) ? 0.0 : m;
    });
  }
  r.u_monotone = check_on_window("u_nondecreasing", base, 1e-9, [&](double t) { return uv(t)[2]; });
  return r;
}

}  // namespace heavyball::xy
