#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heavyball/ode/config.hpp"
#include "heavyball/ode/types.hpp"

namespace heavyball::ode {

template <typename Scalar>
class DormandPrince45;

/// Numerical solution on [0, t_end] with a continuous (C^1) dense-output
/// polynomial on every accepted step. Immutable once the integrator returns it.
///
/// Each segment stores the five coefficient vectors of the Dormand-Prince
/// quartic interpolant:
///   y(t_i + theta*h) = r1 + theta*(r2 + (1-theta)*(r3 + theta*(r4 + (1-theta)*r5)))
template <typename Scalar = double>
class Trajectory {
 public:
  using Vector = VectorX<Scalar>;

  Eigen::Index dimension() const { return dim_; }
  std::size_t num_nodes() const { return times_.size(); }
  std::size_t num_segments() const { return times_.size() - 1; }

  const std::vector<Scalar>& times() const { return times_; }
  Scalar t_begin() const { return times_.front(); }
  Scalar t_end() const { return times_.back(); }
  Termination termination() const { return termination_; }
  const Field<Scalar>& field() const { return field_; }
  std::size_t rejected_steps() const { return rejected_; }

  Eigen::Map<const Vector> state(std::size_t i) const {
    return Eigen::Map<const Vector>(states_.data() + i * static_cast<std::size_t>(dim_), dim_);
  }

  /// Dense evaluation; returns stored states exactly at nodes.
  Vector operator()(Scalar t) const {
    const std::size_t seg = segment_of(t);
    if (t == times_[seg]) return state(seg);
    if (seg + 1 == times_.size() - 1 && t == times_.back()) return state(seg + 1);
    return eval_segment(seg, t);
  }

  /// Time derivative of the dense-output polynomial.
  Vector derivative(Scalar t) const {
    const std::size_t seg = segment_of(t);
    const Scalar h = times_[seg + 1] - times_[seg];
    const Scalar th = (t - times_[seg]) / h;
    const Scalar th1 = Scalar(1) - th;
    const auto r = coeff_block(seg);
    Vector d = r[1] + (Scalar(1) - Scalar(2) * th) * r[2] + th * (Scalar(2) - Scalar(3) * th) * r[3] +
               Scalar(2) * th * th1 * (Scalar(1) - Scalar(2) * th) * r[4];
    return d / h;
  }

  /// g(t, y(t)) evaluated on the dense state.
  Vector rate(Scalar t) const { return field_(t, (*this)(t)); }

  /// Index of the segment [t_i, t_{i+1}] containing t (the left one at interior nodes).
  std::size_t segment_of(Scalar t) const {
    if (!(t >= times_.front() && t <= times_.back())) {
      throw std::out_of_range("dense evaluation outside trajectory span");
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - times_.begin());
    idx = idx == 0 ? 0 : idx - 1;
    return std::min(idx, times_.size() - 2);
  }

 private:
  friend class DormandPrince45<Scalar>;

  Trajectory(Field<Scalar> field, const Vector& y0, Scalar t0) : field_(std::move(field)), dim_(y0.size()) {
    times_.push_back(t0);
    states_.assign(y0.data(), y0.data() + y0.size());
  }

  void append(Scalar t1, const Vector& y1, const Vector& r3, const Vector& r4, const Vector& r5) {
    const std::size_t n = static_cast<std::size_t>(dim_);
    const Eigen::Map<const Vector> y0(states_.data() + (times_.size() - 1) * n, dim_);
    const Vector r2 = y1 - y0;
    const std::size_t base = coeffs_.size();
    coeffs_.resize(base + 5 * n);
    Eigen::Map<Vector>(coeffs_.data() + base, dim_) = y0;
    Eigen::Map<Vector>(coeffs_.data() + base + n, dim_) = r2;
    Eigen::Map<Vector>(coeffs_.data() + base + 2 * n, dim_) = r3;
    Eigen::Map<Vector>(coeffs_.data() + base + 3 * n, dim_) = r4;
    Eigen::Map<Vector>(coeffs_.data() + base + 4 * n, dim_) = r5;
    times_.push_back(t1);
    states_.insert(states_.end(), y1.data(), y1.data() + y1.size());
  }

  std::array<Eigen::Map<const Vector>, 5> coeff_block(std::size_t seg) const {
    const std::size_t n = static_cast<std::size_t>(dim_);
    const Scalar* p = coeffs_.data() + seg * 5 * n;
    return {Eigen::Map<const Vector>(p, dim_), Eigen::Map<const Vector>(p + n, dim_),
            Eigen::Map<const Vector>(p + 2 * n, dim_), Eigen::Map<const Vector>(p + 3 * n, dim_),
            Eigen::Map<const Vector>(p + 4 * n, dim_)};
  }

  Vector eval_segment(std::size_t seg, Scalar t) const {
    const Scalar h = times_[seg + 1] - times_[seg];
    const Scalar th = (t - times_[seg]) / h;
    const Scalar th1 = Scalar(1) - th;
    const auto r = coeff_block(seg);
    return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
  }

  Field<Scalar> field_;
  Eigen::Index dim_ = 0;
  std::vector<Scalar> times_;
  std::vector<Scalar> states_;
  std::vector<Scalar> coeffs_;
  Termination termination_ = Termination::ReachedEnd;
  std::size_t rejected_ = 0;
};

}  // namespace heavyball::ode
