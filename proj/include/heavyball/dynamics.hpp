#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "heavyball/objectives.hpp"
#include "heavyball/ode.hpp"
#include "heavyball/types.hpp"

namespace heavyball {

/// eps x'' + gamma x' + grad f(x) = 0, x(0) = x0, x'(0) = v0.
struct HeavyBallProblem {
  double epsilon = 0.0;
  double gamma = 0.0;
  Vector x0;
  Vector v0;
  Objective objective;

  void validate() const;
  Index dimension() const { return x0.size(); }
  /// First-order state (x, v).
  Vector initial_state() const;
};

/// gamma x' + grad f(x) = 0, x(0) = x0.
struct GradientFlowProblem {
  double gamma = 0.0;
  Vector x0;
  Objective objective;

  void validate() const;
  Index dimension() const { return x0.size(); }
};

/// (x, v) -> (v, -(gamma v + grad f(x)) / eps).
ode::Field<double> heavy_ball_field(const HeavyBallProblem& p);

/// x -> -grad f(x) / gamma.
ode::Field<double> gradient_flow_field(const GradientFlowProblem& p);

/// x'' recovered algebraically from the equation of motion.
Vector acceleration(const HeavyBallProblem& p, const Vector& x, const Vector& v);

/// Copies `base` with max_step capped at eps / gamma (boundary-layer resolution).
ode::IntegratorConfig<double> heavy_ball_config(const HeavyBallProblem& p, ode::IntegratorConfig<double> base);

/// Early stop once |grad f(x)| <= tol_grad and |x'| <= tol_vel held for `dwell` time units.
ode::EarlyStop<double> heavy_ball_stop(const HeavyBallProblem& p, double tol_grad = 1e-9, double tol_vel = 1e-9,
                                       double dwell = 1.0);
ode::EarlyStop<double> gradient_flow_stop(const GradientFlowProblem& p, double tol_grad = 1e-9,
                                          double tol_vel = 1e-9, double dwell = 1.0);

/// F = f(x) + (eps / 2) |v|^2.
double total_energy(const Vector& x, const Vector& v, double epsilon, const Objective& f);

/// H_alpha(x, y) = f(x) + alpha |x - y|^2.
double lyapunov_H(const Vector& x, const Vector& y, double alpha, const Objective& f);

/// grad H_alpha(x, y) = (grad f(x) + 2 alpha (x - y), 2 alpha (y - x)).
Vector lyapunov_H_gradient(const Vector& x, const Vector& y, double alpha, const Objective& f);

/// u = x + beta v.
Vector auxiliary_state(const Vector& x, const Vector& v, double beta);

class InvalidLipschitz : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Constants of the H_alpha length argument for given (gamma, eps, L):
///   beta  = min{eps / ((1 + gamma) L), sqrt(1 + gamma / L) - 1}
///   alpha = (gamma beta + eps) / (2 beta^2)
///   a     = gamma - L beta (1 + beta / 2)
///   b     = beta (eps - L beta / 2)
///   c     = L beta + gamma + eps + gamma beta
/// With these, d/dt H_alpha(u, x) <= -a |x'|^2 - b |x''|^2 along solutions staying
/// where L is valid, and c / a <= 4 (1 + L / gamma), eps^2 / (b c) <= 2L + 6L / gamma.
///
/// `c_grad` multiplies |x'| in the published gradient bound |grad H_alpha(u, x)| <=
/// c |x'| + eps |x''|. That bound uses |u - x| = beta^2 |x'| where in fact
/// |u - x| = beta |x'|; `c_grad_full` = L beta + 3 gamma + 2 eps / beta is the
/// constant that makes the inequality hold for the full (stacked) gradient.
struct LengthLemmaConstants {
  double gamma = 0.0;
  double epsilon = 0.0;
  double L = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double a_diss = 0.0;
  double b_diss = 0.0;
  double c_grad = 0.0;
  double c_grad_full = 0.0;
  std::optional<double> eta;
};

/// Throws InvalidLipschitz unless L >= max{1, eps}.
LengthLemmaConstants length_lemma_constants(double gamma, double epsilon, double L);
LengthLemmaConstants length_lemma_constants(double gamma, double epsilon, double L, double speed_bound);

/// eta = 2 r (r + 1).
double eta_constant(double r);

/// phi(t) = 8 (2 + L + 5 L / gamma) m psi(t / (2m)) for a caller-supplied concave psi.
double phi_bound(double t, const std::function<double(double)>& psi, double L, double gamma, int m);

struct SpeedBoundInputs {
  double gamma = 0.0;
  double L = 0.0;
  double r0 = 0.0;
  double sup_f = 0.0;
  double inf_f = 0.0;
  double sup_grad = 0.0;
};

/// sqrt((2 / eps)(sup f - inf f) + r0^2); decreasing in eps.
double speed_bound_energy(const SpeedBoundInputs& in, double epsilon);

/// (1/gamma) [sqrt((eps L^2 / gamma^2)(sup f - inf f + eps r0^2 / 2) + (gamma r0 + sup|grad f|)^2) + sup|grad f|];
/// increasing in eps.
double speed_bound_growth(const SpeedBoundInputs& in, double epsilon);

struct SpeedBound {
  double at_epsilon = 0.0;  // min of the two bounds at the requested eps
  double r = 0.0;           // eps-free bound: max over eps > 0 of the minimum
  double argmax_epsilon = 0.0;
};

SpeedBound speed_bound(double gamma, double epsilon, double L, double r0, double sup_f, double inf_f,
                       double sup_grad);

}  // namespace heavyball
