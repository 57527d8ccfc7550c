#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "heavyball/types.hpp"

namespace heavyball {

/// Structured description of an objective's critical set.
struct CriticalSet {
  std::string description;
  std::vector<double> critical_values;
};

/// A smooth, lower-bounded function with its gradient and optional metadata.
struct Objective {
  std::string name;
  Index dimension = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::optional<double> known_inf;
  std::optional<CriticalSet> critical_set;
  // Upper bound on the spectral norm of the Hessian over a box; empty when unavailable.
  std::function<double(const Box&)> hessian_bound;
  // Hypotheses that cannot be checked at runtime (e.g. definability).
  std::string assumptions;
};

class UnknownObjective : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedObjective : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// f(x, y) = (xy - 1)^2.
Objective xy_objective();

/// f = value everywhere.
Objective constant_objective(Index dimension, double value = 0.0);

/// f(x) = |x|^2 / 2.
Objective quadratic_objective(Index dimension);

/// Registry lookup ("xy", "constant", "quadratic"). Throws UnknownObjective.
Objective make_objective(std::string_view name, Index dimension = 2);
std::vector<std::string> objective_names();

enum class CriticalKind { Origin, Hyperbola, NotCritical };
const char* to_string(CriticalKind kind);

/// Classifies p against the critical set of the xy objective. Origin wins ties.
CriticalKind classify_critical_point(const Objective& objective, const Vector& p, double tol);

/// Upper bound on the Lipschitz constant of the gradient over `box`, clamped
/// below by max{1, eps_bar}. Uses the analytic Hessian bound when present,
/// otherwise 1.25 times the largest sampled Hessian norm on a ~10^4 point grid.
double lipschitz_bound_on_box(const Objective& objective, const Box& box, double eps_bar = 0.0);

/// Largest relative deviation between the analytic gradient and five-point
/// central differences (step 1e-5 times the box width) at random points.
double check_gradient(const Objective& objective, const Box& box, std::size_t samples, std::uint64_t seed = 0);

struct BoxExtrema {
  double sup_f = 0.0;
  double inf_f = 0.0;
  double sup_grad = 0.0;
};

/// Grid-sampled extrema of f and |grad f| over a box (corners included).
BoxExtrema sample_box_extrema(const Objective& objective, const Box& box, std::size_t target_points = 10000);

}  // namespace heavyball
