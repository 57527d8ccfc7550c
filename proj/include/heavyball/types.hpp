#pragma once

#include <stdexcept>

#include <Eigen/Core>

namespace heavyball {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Axis-aligned box [lower, upper] in R^n.
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(Index dim, double lo, double hi) {
    return Box{Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
  }

  Index dimension() const { return lower.size(); }
  Vector width() const { return upper - lower; }
  Vector center() const { return (lower + upper) / 2; }

  bool valid() const {
    return lower.size() == upper.size() && lower.size() > 0 && lower.allFinite() && upper.allFinite() &&
           (upper.array() >= lower.array()).all();
  }

  bool contains(const Vector& p) const {
    return (p.array() >= lower.array()).all() && (p.array() <= upper.array()).all();
  }

  bool contains(const Box& other) const {
    return (other.lower.array() >= lower.array()).all() && (other.upper.array() <= upper.array()).all();
  }

  void expand(const Vector& p) {
    if (lower.size() == 0) {
      lower = p;
      upper = p;
      return;
    }
    lower = lower.cwiseMin(p);
    upper = upper.cwiseMax(p);
  }

  /// Grows every side by `relative` times the widest extent plus `absolute`.
  Box padded(double relative, double absolute) const {
    const double pad = relative * width().maxCoeff() + absolute;
    return Box{lower.array() - pad, upper.array() + pad};
  }
};

}  // namespace heavyball
