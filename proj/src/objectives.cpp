#include "heavyball/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace heavyball {

namespace {

// Visits a tensor grid with `per_dim` points per axis (endpoints included).
template <typename F>
void for_each_grid_point(const Box& box, std::size_t per_dim, F&& visit) {
  const Index n = box.dimension();
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  Vector p(n);
  while (true) {
    for (Index d = 0; d < n; ++d) {
      const double frac = per_dim > 1 ? static_cast<double>(idx[d]) / static_cast<double>(per_dim - 1) : 0.5;
      p[d] = box.lower[d] + frac * (box.upper[d] - box.lower[d]);
    }
    visit(p);
    Index d = 0;
    while (d < n && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == n) break;
  }
}

std::size_t points_per_dim(Index n, std::size_t target) {
  const double k = std::pow(static_cast<double>(target), 1.0 / static_cast<double>(n));
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(k)));
}

double max_abs_square(double lo, double hi) { return std::max(lo * lo, hi * hi); }

// Interval row-sum bound on |Hess f| for f = (xy - 1)^2, whose Hessian is
// [[2y^2, 4xy - 2], [4xy - 2, 2x^2]].
double xy_hessian_bound(const Box& box) {
  const double xl = box.lower[0], xu = box.upper[0];
  const double yl = box.lower[1], yu = box.upper[1];
  const double corners[] = {xl * yl, xl * yu, xu * yl, xu * yu};
  const double pmin = *std::min_element(std::begin(corners), std::end(corners));
  const double pmax = *std::max_element(std::begin(corners), std::end(corners));
  const double off = std::max(std::abs(4.0 * pmin - 2.0), std::abs(4.0 * pmax - 2.0));
  const double row1 = 2.0 * max_abs_square(yl, yu) + off;
  const double row2 = 2.0 * max_abs_square(xl, xu) + off;
  return std::max(row1, row2);
}

double sampled_hessian_bound(const Objective& obj, const Box& box) {
  const Index n = obj.dimension;
  double worst = 0.0;
  for_each_grid_point(box, points_per_dim(n, 10000), [&](const Vector& p) {
    Eigen::MatrixXd H(n, n);
    for (Index j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[j]));
      Vector xp = p, xm = p;
      xp[j] += h;
      xm[j] -= h;
      H.col(j) = (obj.gradient(xp) - obj.gradient(xm)) / (2.0 * h);
    }
    const Eigen::MatrixXd S = (H + H.transpose()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
  });
  return 1.25 * worst;
}

}  // namespace

Objective xy_objective() {
  Objective f;
  f.name = "xy";
  f.dimension = 2;
  f.value = [](const Vector& p) {
    const double r = p[0] * p[1] - 1.0;
    return r * r;
  };
  f.gradient = [](const Vector& p) {
    const double r = p[0] * p[1] - 1.0;
    Vector g(2);
    g << 2.0 * p[1] * r, 2.0 * p[0] * r;
    return g;
  };
  f.known_inf = 0.0;
  f.critical_set = CriticalSet{"{(0,0)} U {(x,y): xy = 1}", {0.0, 1.0}};
  f.hessian_bound = xy_hessian_bound;
  f.assumptions = "semi-algebraic (definable in the real field with constants)";
  return f;
}

Objective constant_objective(Index dimension, double value) {
  Objective f;
  f.name = "constant";
  f.dimension = dimension;
  f.value = [value](const Vector&) { return value; };
  f.gradient = [dimension](const Vector&) { return Vector::Zero(dimension).eval(); };
  f.known_inf = value;
  f.hessian_bound = [](const Box&) { return 0.0; };
  f.assumptions = "semi-algebraic";
  return f;
}

Objective quadratic_objective(Index dimension) {
  Objective f;
  f.name = "quadratic";
  f.dimension = dimension;
  f.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  f.gradient = [](const Vector& x) { return x; };
  f.known_inf = 0.0;
  f.critical_set = CriticalSet{"{0}", {0.0}};
  f.hessian_bound = [](const Box&) { return 1.0; };
  f.assumptions = "semi-algebraic";
  return f;
}

Objective make_objective(std::string_view name, Index dimension) {
  if (name == "xy") {
    if (dimension != 2) throw UnknownObjective("objective 'xy' is two-dimensional");
    return xy_objective();
  }
  if (name == "constant") return constant_objective(dimension);
  if (name == "quadratic") return quadratic_objective(dimension);
  throw UnknownObjective("unknown objective '" + std::string(name) + "'");
}

std::vector<std::string> objective_names() { return {"constant", "quadratic", "xy"}; }

const char* to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::Origin:
      return "Origin";
    case CriticalKind::Hyperbola:
      return "Hyperbola";
    case CriticalKind::NotCritical:
      return "NotCritical";
  }
  return "NotCritical";
}

CriticalKind classify_critical_point(const Objective& objective, const Vector& p, double tol) {
  if (objective.name != "xy") {
    throw UnsupportedObjective("critical-point classification is only defined for the xy objective");
  }
  if (p.norm() <= tol) return CriticalKind::Origin;
  if (std::abs(p[0] * p[1] - 1.0) <= tol) return CriticalKind::Hyperbola;
  return CriticalKind::NotCritical;
}

double lipschitz_bound_on_box(const Objective& objective, const Box& box, double eps_bar) {
  if (!box.valid() || box.dimension() != objective.dimension) {
    throw std::invalid_argument("box must be nonempty, bounded and match the objective dimension");
  }
  const double raw = objective.hessian_bound ? objective.hessian_bound(box) : sampled_hessian_bound(objective, box);
  return std::max({raw, 1.0, eps_bar});
}

double check_gradient(const Objective& objective, const Box& box, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("samples must be at least 1");
  const Index n = objective.dimension;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector width = box.width();
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    Vector p(n);
    for (Index d = 0; d < n; ++d) p[d] = box.lower[d] + unit(rng) * width[d];
    const Vector analytic = objective.gradient(p);
    Vector fd(n);
    for (Index d = 0; d < n; ++d) {
      const double h = 1e-5 * (width[d] > 0 ? width[d] : 1.0);
      auto at = [&](double k) {
        Vector q = p;
        q[d] += k * h;
        return objective.value(q);
      };
      fd[d] = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
    }
    const double scale = std::max(analytic.norm(), fd.norm());
    const double rel = scale > 0 ? (analytic - fd).norm() / scale : 0.0;
    worst = std::max(worst, rel);
  }
  return worst;
}

BoxExtrema sample_box_extrema(const Objective& objective, const Box& box, std::size_t target_points) {
  BoxExtrema e{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0};
  for_each_grid_point(box, points_per_dim(objective.dimension, target_points), [&](const Vector& p) {
    const double v = objective.value(p);
    e.sup_f = std::max(e.sup_f, v);
    e.inf_f = std::min(e.inf_f, v);
    e.sup_grad = std::max(e.sup_grad, objective.gradient(p).norm());
  });
  return e;
}

}  // namespace heavyball
