#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "heavyball/ode/trajectory.hpp"

namespace heavyball::ode {

namespace detail {

// 15-point Gauss-Kronrod rule (QUADPACK qk15 abscissae and weights).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename Scalar, typename F>
void gauss_kronrod15(const F& f, Scalar a, Scalar b, Scalar& result, Scalar& error) {
  const Scalar center = (a + b) / 2;
  const Scalar half = (b - a) / 2;
  const Scalar fc = f(center);
  Scalar resg = fc * Scalar(kWg[3]);
  Scalar resk = fc * Scalar(kWgk[7]);
  for (int j = 0; j < 7; ++j) {
    const Scalar dx = half * Scalar(kXgk[j]);
    const Scalar f1 = f(center - dx);
    const Scalar f2 = f(center + dx);
    resk += Scalar(kWgk[j]) * (f1 + f2);
    if (j % 2 == 1) resg += Scalar(kWg[j / 2]) * (f1 + f2);
  }
  result = resk * half;
  using std::abs;
  error = abs((resk - resg) * half);
}

template <typename Scalar, typename F>
Scalar adaptive_gk(const F& f, Scalar a, Scalar b, Scalar rel_tol, Scalar abs_floor, int depth) {
  Scalar whole = 0, err = 0;
  gauss_kronrod15(f, a, b, whole, err);
  using std::abs;
  if (err <= std::max(rel_tol * abs(whole), abs_floor) || depth <= 0) return whole;
  const Scalar m = a + (b - a) / 2;
  return adaptive_gk(f, a, m, rel_tol, abs_floor / 2, depth - 1) +
         adaptive_gk(f, m, b, rel_tol, abs_floor / 2, depth - 1);
}

}  // namespace detail

/// Integral of integrand(t, y(t)) over [t0, t1] along the dense output. The range
/// is split at the stored nodes, and each piece is integrated by adaptive 15-point
/// Gauss-Kronrod quadrature to the requested relative accuracy.
template <typename Scalar>
Scalar integrate_along(const Trajectory<Scalar>& traj,
                       const std::function<Scalar(Scalar, const VectorX<Scalar>&)>& integrand, Scalar t0, Scalar t1,
                       Scalar rel_tol = Scalar(1e-8)) {
  if (!(t0 >= traj.t_begin() && t1 <= traj.t_end() && t0 <= t1)) {
    throw std::out_of_range("quadrature interval outside trajectory span");
  }
  if (t0 == t1) return Scalar(0);
  const auto& ts = traj.times();
  const auto f = [&](Scalar t) { return integrand(t, traj(t)); };
  Scalar total = 0;
  std::size_t seg = traj.segment_of(t0);
  Scalar a = t0;
  while (a < t1) {
    const Scalar b = std::min(ts[seg + 1], t1);
    if (b > a) total += detail::adaptive_gk(f, a, b, rel_tol, Scalar(1e-300), 12);
    a = b;
    ++seg;
    if (seg + 1 >= ts.size()) break;
  }
  return total;
}

/// Arc length of the selected position components: integral of ||d/dt x(t)||,
/// with the velocity taken from the field on the dense state.
template <typename Scalar>
Scalar arc_length(const Trajectory<Scalar>& traj, Components position, Scalar t0, Scalar t1,
                  Scalar rel_tol = Scalar(1e-8)) {
  const auto& g = traj.field();
  return integrate_along<Scalar>(
      traj,
      [&](Scalar t, const VectorX<Scalar>& y) { return g(t, y).segment(position.offset, position.count).norm(); }, t0,
      t1, rel_tol);
}

}  // namespace heavyball::ode
