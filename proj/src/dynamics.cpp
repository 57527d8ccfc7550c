#include "heavyball/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace heavyball {

void HeavyBallProblem::validate() const {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (x0.size() != objective.dimension || v0.size() != objective.dimension) {
    throw std::invalid_argument("initial position and velocity must match the objective dimension");
  }
}

Vector HeavyBallProblem::initial_state() const {
  Vector s(2 * x0.size());
  s << x0, v0;
  return s;
}

void GradientFlowProblem::validate() const {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (x0.size() != objective.dimension) {
    throw std::invalid_argument("initial position must match the objective dimension");
  }
}

ode::Field<double> heavy_ball_field(const HeavyBallProblem& p) {
  p.validate();
  const Index n = p.dimension();
  return [n, eps = p.epsilon, gamma = p.gamma, grad = p.objective.gradient](double, const Vector& s) {
    Vector ds(2 * n);
    const auto v = s.tail(n);
    ds.head(n) = v;
    ds.tail(n) = -(gamma * v + grad(s.head(n))) / eps;
    return ds;
  };
}

ode::Field<double> gradient_flow_field(const GradientFlowProblem& p) {
  p.validate();
  return [gamma = p.gamma, grad = p.objective.gradient](double, const Vector& x) {
    return Vector(-grad(x) / gamma);
  };
}

Vector acceleration(const HeavyBallProblem& p, const Vector& x, const Vector& v) {
  return -(p.gamma * v + p.objective.gradient(x)) / p.epsilon;
}

ode::IntegratorConfig<double> heavy_ball_config(const HeavyBallProblem& p, ode::IntegratorConfig<double> base) {
  const double cap = p.epsilon / p.gamma;
  base.max_step = base.max_step ? std::min(*base.max_step, cap) : cap;
  return base;
}

ode::EarlyStop<double> heavy_ball_stop(const HeavyBallProblem& p, double tol_grad, double tol_vel, double dwell) {
  const Index n = p.dimension();
  return {[n, tol_grad, tol_vel, grad = p.objective.gradient](double, const Vector& s) {
            return s.tail(n).norm() <= tol_vel && grad(s.head(n)).norm() <= tol_grad;
          },
          dwell};
}

ode::EarlyStop<double> gradient_flow_stop(const GradientFlowProblem& p, double tol_grad, double tol_vel,
                                          double dwell) {
  return {[tol_grad, tol_vel, gamma = p.gamma, grad = p.objective.gradient](double, const Vector& x) {
            const double g = grad(x).norm();
            return g <= tol_grad && g / gamma <= tol_vel;
          },
          dwell};
}

double total_energy(const Vector& x, const Vector& v, double epsilon, const Objective& f) {
  return f.value(x) + 0.5 * epsilon * v.squaredNorm();
}

double lyapunov_H(const Vector& x, const Vector& y, double alpha, const Objective& f) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  return f.value(x) + alpha * (x - y).squaredNorm();
}

Vector lyapunov_H_gradient(const Vector& x, const Vector& y, double alpha, const Objective& f) {
  const Index n = x.size();
  Vector g(2 * n);
  g.head(n) = f.gradient(x) + 2.0 * alpha * (x - y);
  g.tail(n) = 2.0 * alpha * (y - x);
  return g;
}

Vector auxiliary_state(const Vector& x, const Vector& v, double beta) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
  return x + beta * v;
}

LengthLemmaConstants length_lemma_constants(double gamma, double epsilon, double L) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(L >= std::max(1.0, epsilon))) {
    throw InvalidLipschitz("Lipschitz constant must satisfy L >= max{1, eps}, got L=" + std::to_string(L));
  }
  LengthLemmaConstants k;
  k.gamma = gamma;
  k.epsilon = epsilon;
  k.L = L;
  k.beta = std::min(epsilon / ((1.0 + gamma) * L), std::sqrt(1.0 + gamma / L) - 1.0);
  k.alpha = (gamma * k.beta + epsilon) / (2.0 * k.beta * k.beta);
  k.a_diss = gamma - L * k.beta * (1.0 + k.beta / 2.0);
  k.b_diss = k.beta * (epsilon - L * k.beta / 2.0);
  k.c_grad = L * k.beta + gamma + epsilon + gamma * k.beta;
  k.c_grad_full = L * k.beta + 3.0 * gamma + 2.0 * epsilon / k.beta;
  return k;
}

LengthLemmaConstants length_lemma_constants(double gamma, double epsilon, double L, double speed_bound) {
  LengthLemmaConstants k = length_lemma_constants(gamma, epsilon, L);
  k.eta = eta_constant(speed_bound);
  return k;
}

double eta_constant(double r) {
  if (!(r >= 0)) throw std::invalid_argument("velocity bound must be nonnegative");
  return 2.0 * r * (r + 1.0);
}

double phi_bound(double t, const std::function<double(double)>& psi, double L, double gamma, int m) {
  if (!(t >= 0)) throw std::invalid_argument("phi is defined on t >= 0");
  if (m < 1) throw std::invalid_argument("critical-value count must be at least 1");
  const double md = static_cast<double>(m);
  return 8.0 * (2.0 + L + 5.0 * L / gamma) * md * psi(t / (2.0 * md));
}

double speed_bound_energy(const SpeedBoundInputs& in, double epsilon) {
  return std::sqrt(2.0 / epsilon * (in.sup_f - in.inf_f) + in.r0 * in.r0);
}

double speed_bound_growth(const SpeedBoundInputs& in, double epsilon) {
  const double g = in.gamma;
  const double inner = epsilon * in.L * in.L / (g * g) * (in.sup_f - in.inf_f + epsilon * in.r0 * in.r0 / 2.0) +
                       std::pow(g * in.r0 + in.sup_grad, 2);
  return (std::sqrt(inner) + in.sup_grad) / g;
}

SpeedBound speed_bound(double gamma, double epsilon, double L, double r0, double sup_f, double inf_f,
                       double sup_grad) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (!(sup_f >= inf_f)) throw std::invalid_argument("sup_f must be at least inf_f");
  const SpeedBoundInputs in{gamma, L, r0, sup_f, inf_f, sup_grad};
  // min(decreasing, increasing) is unimodal in log(eps).
  const auto h = [&](double log_eps) {
    const double e = std::exp(log_eps);
    return std::min(speed_bound_energy(in, e), speed_bound_growth(in, e));
  };

  SpeedBound out;
  out.at_epsilon = epsilon > 0 ? std::min(speed_bound_energy(in, epsilon), speed_bound_growth(in, epsilon))
                               : speed_bound_growth(in, 0.0);

  constexpr double lo = -80.0, hi = 80.0;
  constexpr int scan = 321;
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < scan; ++i) {
    const double s = lo + (hi - lo) * i / (scan - 1);
    const double v = h(s);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double step = (hi - lo) / (scan - 1);
  double a = lo + step * std::max(best - 1, 0);
  double b = lo + step * std::min(best + 1, scan - 1);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double hc = h(c), hd = h(d);
  while (b - a > 1e-10) {
    if (hc >= hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - invphi * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + invphi * (b - a);
      hd = h(d);
    }
  }
  const double s_star = (a + b) / 2.0;
  const double v_star = h(s_star);
  if (v_star >= best_val) {
    out.r = v_star;
    out.argmax_epsilon = std::exp(s_star);
  } else {
    out.r = best_val;
    out.argmax_epsilon = std::exp(lo + step * best);
  }
  return out;
}

}  // namespace heavyball
