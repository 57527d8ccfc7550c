#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "heavyball/ode/types.hpp"

namespace heavyball::ode {

/// Stop once `converged(t, y)` has held at every accepted node for `dwell` time units.
template <typename Scalar>
struct EarlyStop {
  std::function<bool(Scalar, const VectorX<Scalar>&)> converged;
  Scalar dwell = Scalar(1);
};

template <typename Scalar = double>
struct IntegratorConfig {
  Scalar rel_tol = Scalar(1e-9);
  Scalar abs_tol = Scalar(1e-11);
  std::optional<Scalar> max_step;
  std::optional<Scalar> initial_step;
  Scalar t_end = Scalar(1);
  std::size_t max_steps = 20'000'000;
  // Accepted steps land exactly on each of these times.
  std::vector<Scalar> forced_times;
  std::optional<EarlyStop<Scalar>> early_stop;

  void validate() const {
    if (!(rel_tol > 0)) throw std::invalid_argument("rel_tol must be positive");
    if (!(abs_tol > 0)) throw std::invalid_argument("abs_tol must be positive");
    if (!(t_end > 0)) throw std::invalid_argument("t_end must be positive");
    if (max_steps == 0) throw std::invalid_argument("max_steps must be positive");
    if (max_step && !(*max_step > 0)) throw std::invalid_argument("max_step must be positive");
    if (initial_step && !(*initial_step > 0)) {
      throw std::invalid_argument("initial_step must be positive");
    }
    if (early_stop && !(early_stop->dwell >= 0)) {
      throw std::invalid_argument("early-stop dwell must be nonnegative");
    }
  }
};

enum class Termination { ReachedEnd, EarlyStop };

inline const char* to_string(Termination t) {
  return t == Termination::ReachedEnd ? "reached_end" : "early_stop";
}

}  // namespace heavyball::ode
