#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>
#include <sstream>
#include <utility>
#include <vector>

#include "heavyball/ode/config.hpp"
#include "heavyball/ode/trajectory.hpp"
#include "heavyball/ode/types.hpp"

namespace heavyball::ode {

/// Explicit Runge-Kutta 5(4) pair of Dormand and Prince with the quartic
/// continuous extension and a proportional-integral step-size controller.
template <typename Scalar = double>
class DormandPrince45 {
 public:
  using Vector = VectorX<Scalar>;

  static Trajectory<Scalar> run(Field<Scalar> field, const Vector& y0, const IntegratorConfig<Scalar>& config);

 private:
  // Butcher tableau.
  static constexpr Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;
  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187, a53 = Scalar(64448) / 6561,
                          a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33, a63 = Scalar(46732) / 5247,
                          a64 = Scalar(49) / 176, a65 = Scalar(-5103) / 18656;
  static constexpr Scalar a71 = Scalar(35) / 384, a73 = Scalar(500) / 1113, a74 = Scalar(125) / 192,
                          a75 = Scalar(-2187) / 6784, a76 = Scalar(11) / 84;
  // Difference between the 5th and embedded 4th order weights.
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695, e4 = Scalar(71) / 1920,
                          e5 = Scalar(-17253) / 339200, e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
  // Dense output.
  static constexpr Scalar d1 = Scalar(-12715105075.0L / 11282082432.0L), d3 = Scalar(87487479700.0L / 32700410799.0L),
                          d4 = Scalar(-10690763975.0L / 1880347072.0L), d5 = Scalar(701980252875.0L / 199316789632.0L),
                          d6 = Scalar(-1453857185.0L / 822651844.0L), d7 = Scalar(69997945.0L / 29380423.0L);

  // Controller constants.
  static constexpr Scalar kSafety = Scalar(0.9);
  static constexpr Scalar kMaxShrink = Scalar(5);   // h_new >= h / 5
  static constexpr Scalar kMaxGrow = Scalar(0.1);   // h_new <= 10 h
  static constexpr Scalar kBeta = Scalar(0.04);
  static constexpr Scalar kExpo = Scalar(0.2) - kBeta * Scalar(0.75);

  static Scalar error_norm(const Vector& err, const Vector& y0, const Vector& y1, const IntegratorConfig<Scalar>& c) {
    using std::abs;
    using std::sqrt;
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
      const Scalar sk = c.abs_tol + c.rel_tol * std::max(abs(y0[i]), abs(y1[i]));
      const Scalar q = err[i] / sk;
      acc += q * q;
    }
    return sqrt(acc / static_cast<Scalar>(std::max<Eigen::Index>(err.size(), 1)));
  }

  static Scalar initial_step(const Field<Scalar>& g, Scalar t, const Vector& y, const Vector& f0, Scalar hmax,
                             const IntegratorConfig<Scalar>& c) {
    using std::abs;
    using std::max;
    using std::min;
    using std::pow;
    using std::sqrt;
    Scalar dnf = 0, dny = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const Scalar sk = c.abs_tol + c.rel_tol * abs(y[i]);
      dnf += (f0[i] / sk) * (f0[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    Scalar h = (dnf <= Scalar(1e-10) || dny <= Scalar(1e-10)) ? Scalar(1e-6) : sqrt(dny / dnf) * Scalar(0.01);
    h = min(h, hmax);
    const Vector y1 = y + h * f0;
    const Vector f1 = g(t + h, y1);
    Scalar der2 = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const Scalar sk = c.abs_tol + c.rel_tol * abs(y[i]);
      der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = sqrt(der2) / h;
    const Scalar der12 = max(abs(der2), sqrt(dnf));
    const Scalar h1 = der12 <= Scalar(1e-15) ? max(Scalar(1e-6), abs(h) * Scalar(1e-3)) : pow(Scalar(0.01) / der12, Scalar(0.2));
    return min({Scalar(100) * abs(h), h1, hmax});
  }

  [[noreturn]] static void fail(IntegrationError::Kind kind, Scalar t, const char* msg) {
    std::ostringstream os;
    os << msg << " at t=" << t;
    throw IntegrationError(kind, static_cast<double>(t), os.str());
  }
};

template <typename Scalar>
Trajectory<Scalar> DormandPrince45<Scalar>::run(Field<Scalar> field, const Vector& y0,
                                               const IntegratorConfig<Scalar>& config) {
  using std::abs;
  using std::max;
  using std::min;
  using std::pow;
  config.validate();
  if (!y0.allFinite()) fail(IntegrationError::Kind::NonFiniteState, Scalar(0), "non-finite initial state");

  Trajectory<Scalar> traj(field, y0, Scalar(0));
  const Field<Scalar>& g = traj.field_;

  std::vector<Scalar> stops;
  for (Scalar s : config.forced_times) {
    if (s > 0 && s < config.t_end) stops.push_back(s);
  }
  stops.push_back(config.t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  std::size_t next_stop = 0;

  const Scalar hmax = config.max_step ? min(*config.max_step, config.t_end) : config.t_end;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  Scalar t = 0;
  Vector y = y0;
  Vector k1 = g(t, y);
  if (!k1.allFinite()) fail(IntegrationError::Kind::NonFiniteState, t, "non-finite field value");
  Scalar h = config.initial_step ? min(*config.initial_step, hmax) : initial_step(g, t, y, k1, hmax, config);

  Vector k2, k3, k4, k5, k6, k7, ytmp, ynew, errv;
  Scalar facold = Scalar(1e-4);
  bool last_rejected = false;
  std::size_t steps = 0;
  bool converging = false;
  Scalar converged_since = 0;

  while (true) {
    if (++steps > config.max_steps) fail(IntegrationError::Kind::MaxStepsExceeded, t, "maximum number of steps exceeded");
    if (h < Scalar(10) * eps * max(abs(t), Scalar(1))) {
      fail(IntegrationError::Kind::StepUnderflow, t, "step size underflow (problem too stiff for explicit stepping)");
    }

    // Land exactly on the next forced time when close to it.
    const Scalar target = stops[next_stop];
    bool hits_stop = false;
    if (t + Scalar(1.01) * h >= target) {
      h = target - t;
      hits_stop = true;
    }

    ytmp = y + h * a21 * k1;
    k2 = g(t + c2 * h, ytmp);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    k3 = g(t + c3 * h, ytmp);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    k4 = g(t + c4 * h, ytmp);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5 = g(t + c5 * h, ytmp);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    k6 = g(t + h, ytmp);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Scalar tnew = hits_stop ? target : t + h;
    k7 = g(tnew, ynew);
    errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Scalar err = error_norm(errv, y, ynew, config);

    if (!(err == err) || !ynew.allFinite() || !k7.allFinite()) {
      // Treat as a failed step; underflow eventually reports a genuinely divergent field.
      h *= Scalar(0.1);
      last_rejected = true;
      ++traj.rejected_;
      continue;
    }

    const Scalar fac11 = pow(max(err, Scalar(1e-300)), kExpo);
    Scalar fac = fac11 / pow(facold, kBeta);
    fac = max(kMaxGrow, min(kMaxShrink, fac / kSafety));
    Scalar hnew = h / fac;

    if (err <= Scalar(1)) {
      facold = max(err, Scalar(1e-4));
      const Vector ydiff = ynew - y;
      const Vector bspl = h * k1 - ydiff;
      const Vector r4 = ydiff - h * k7 - bspl;
      const Vector r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      traj.append(tnew, ynew, bspl, r4, r5);
      t = tnew;
      y = ynew;
      k1 = k7;
      if (hits_stop) ++next_stop;

      hnew = min(abs(hnew), hmax);
      if (last_rejected) hnew = min(hnew, h);
      last_rejected = false;

      if (next_stop == stops.size()) break;

      if (config.early_stop) {
        if (config.early_stop->converged(t, y)) {
          if (!converging) {
            converging = true;
            converged_since = t;
          }
          if (t - converged_since >= config.early_stop->dwell) {
            traj.termination_ = Termination::EarlyStop;
            break;
          }
        } else {
          converging = false;
        }
      }
      h = hnew;
    } else {
      hnew = h / min(kMaxShrink, fac11 / kSafety);
      last_rejected = true;
      ++traj.rejected_;
      h = hnew;
    }
  }
  return traj;
}

/// Integrates y' = field(t, y) from y(0) = y0 over [0, config.t_end].
template <typename Scalar>
Trajectory<Scalar> integrate(Field<Scalar> field, const VectorX<std::type_identity_t<Scalar>>& y0,
                             const IntegratorConfig<Scalar>& config) {
  return DormandPrince45<Scalar>::run(std::move(field), y0, config);
}

}  // namespace heavyball::ode
