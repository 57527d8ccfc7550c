#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace heavyball::ode {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Right-hand side g(t, y) of a first-order system y' = g(t, y).
template <typename Scalar>
using Field = std::function<VectorX<Scalar>(Scalar, const VectorX<Scalar>&)>;

/// Contiguous block of state components holding a position (or any sub-vector).
struct Components {
  Eigen::Index offset = 0;
  Eigen::Index count = 0;
};

class IntegrationError : public std::runtime_error {
 public:
  enum class Kind { StepUnderflow, MaxStepsExceeded, NonFiniteState };

  IntegrationError(Kind kind, double time, const std::string& what)
      : std::runtime_error(what), kind_(kind), time_(time) {}

  Kind kind() const noexcept { return kind_; }
  double time() const noexcept { return time_; }

 private:
  Kind kind_;
  double time_;
};

inline const char* to_string(IntegrationError::Kind kind) {
  switch (kind) {
    case IntegrationError::Kind::StepUnderflow:
      return "StepUnderflow";
    case IntegrationError::Kind::MaxStepsExceeded:
      return "MaxStepsExceeded";
    case IntegrationError::Kind::NonFiniteState:
      return "NonFiniteState";
  }
  return "Unknown";
}

}  // namespace heavyball::ode
