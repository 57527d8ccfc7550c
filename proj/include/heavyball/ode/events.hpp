#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "heavyball/ode/trajectory.hpp"

namespace heavyball::ode {

enum class Direction { Rising, Falling, Any };

template <typename Scalar = double>
struct EventQuery {
  std::function<Scalar(Scalar, const VectorX<Scalar>&)> function;
  Direction direction = Direction::Any;
  // Defaults to the whole trajectory span.
  std::optional<std::pair<Scalar, Scalar>> window;
};

namespace detail {

inline int sign_of(double g) { return (g > 0) - (g < 0); }

inline bool matches(Direction d, int before, int after) {
  switch (d) {
    case Direction::Rising:
      return before < 0 && after >= 0;
    case Direction::Falling:
      return before > 0 && after <= 0;
    case Direction::Any:
      return (before < 0 && after >= 0) || (before > 0 && after <= 0);
  }
  return false;
}

}  // namespace detail

/// Earliest crossing of zero by q.function along the trajectory, in the requested
/// direction. A zero exactly at the window start counts when the function leaves
/// it in the requested direction.
///
/// Sign changes are located on the nodes plus three interior samples per segment,
/// bracketed by bisection on the dense output down to a width of 1e-12 * t_end,
/// then polished by one secant step kept inside the bracket.
template <typename Scalar>
std::optional<Scalar> detect_event(const Trajectory<Scalar>& traj, const EventQuery<Scalar>& q) {
  using std::abs;
  Scalar w0 = traj.t_begin();
  Scalar w1 = traj.t_end();
  if (q.window) {
    w0 = std::max(w0, q.window->first);
    w1 = std::min(w1, q.window->second);
  }
  if (!(w0 <= w1)) return std::nullopt;

  const auto g = [&](Scalar t) { return q.function(t, traj(t)); };
  const Scalar width_tol = Scalar(1e-12) * traj.t_end();

  auto refine = [&](Scalar a, Scalar ga, Scalar b, Scalar gb) -> Scalar {
    const int sa = detail::sign_of(static_cast<double>(ga));
    while (b - a > width_tol) {
      const Scalar m = a + (b - a) / 2;
      if (m <= a || m >= b) break;
      const Scalar gm = g(m);
      if (gm == 0) return m;
      if (detail::sign_of(static_cast<double>(gm)) == sa) {
        a = m;
        ga = gm;
      } else {
        b = m;
        gb = gm;
      }
    }
    Scalar best = abs(ga) <= abs(gb) ? a : b;
    Scalar best_g = abs(ga) <= abs(gb) ? ga : gb;
    if (gb != ga) {
      const Scalar s = std::clamp(a - ga * (b - a) / (gb - ga), a, b);
      const Scalar gs = g(s);
      if (abs(gs) < abs(best_g)) best = s;
    }
    return best;
  };

  // Sample times in increasing order.
  const auto& ts = traj.times();
  std::size_t first = traj.segment_of(w0);

  Scalar t_prev = w0;
  Scalar g_prev = g(w0);
  int last_sign = detail::sign_of(static_cast<double>(g_prev));
  bool at_start_zero = last_sign == 0;

  auto visit = [&](Scalar s) -> std::optional<Scalar> {
    if (s <= t_prev) return std::nullopt;
    const Scalar gs = g(s);
    const int sg = detail::sign_of(static_cast<double>(gs));
    std::optional<Scalar> hit;
    if (at_start_zero) {
      if (sg != 0) {
        at_start_zero = false;
        if (q.direction == Direction::Any || (q.direction == Direction::Rising && sg > 0) ||
            (q.direction == Direction::Falling && sg < 0)) {
          hit = w0;
        }
        last_sign = sg;
      }
    } else if (last_sign != 0 && detail::matches(q.direction, last_sign, sg)) {
      hit = sg == 0 ? s : refine(t_prev, g_prev, s, gs);
    }
    if (sg != 0) {
      last_sign = sg;
      t_prev = s;
      g_prev = gs;
    }
    return hit;
  };

  for (std::size_t seg = first; seg + 1 < ts.size(); ++seg) {
    const Scalar a = ts[seg];
    const Scalar b = ts[seg + 1];
    if (a >= w1) break;
    for (int k = 1; k <= 4; ++k) {
      Scalar s = a + (b - a) * Scalar(k) / Scalar(4);
      if (k == 4) s = b;
      if (s > w1) s = w1;
      if (auto hit = visit(s)) return hit;
      if (s >= w1) return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace heavyball::ode
