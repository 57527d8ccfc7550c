#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heavyball/dynamics.hpp"
#include "heavyball/objectives.hpp"
#include "heavyball/ode.hpp"
#include "heavyball/types.hpp"

namespace heavyball::analysis {

using Trajectory = ode::Trajectory<double>;

class SpanMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BoxViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Verdict { Pass, Fail, NotApplicable, Vacuous };
const char* to_string(Verdict v);

/// lhs <= rhs + slack.
struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  Verdict verdict = Verdict::NotApplicable;

  bool pass() const { return verdict == Verdict::Pass; }
  /// Recomputes the verdict from the stored numbers.
  static Verdict judge(double lhs, double rhs, double slack) {
    return lhs <= rhs + slack ? Verdict::Pass : Verdict::Fail;
  }
};

/// Largest (scaled) residual found over `samples` points; passes when <= slack.
struct ResidualCheck {
  double max_residual = 0.0;
  double slack = 0.0;
  std::size_t samples = 0;
  std::optional<double> worst_time;
  Verdict verdict = Verdict::NotApplicable;

  bool pass() const { return verdict == Verdict::Pass; }
};

struct SpeedCheck {
  double sup_v = 0.0;
  double r = 0.0;
  Box box;
  Verdict verdict = Verdict::NotApplicable;

  bool pass() const { return verdict == Verdict::Pass; }
};

struct LimitPoint {
  Vector position;
  std::optional<CriticalKind> kind;  // empty when the objective has no classifier
  bool converged = false;
  double grad_norm = 0.0;
  double speed = 0.0;
};

struct Window {
  std::string name;
  double begin = 0.0;
  double end = 0.0;
};

/// Where the position sits in a trajectory's state and how to read its velocity.
/// Heavy-ball states are (x, v); gradient-flow states are x with x' from the field.
struct StateLayout {
  Index dimension = 0;
  bool has_velocity = false;

  static StateLayout heavy_ball(Index n) { return {n, true}; }
  static StateLayout gradient_flow(Index n) { return {n, false}; }
  ode::Components positions() const { return {0, dimension}; }
};

Vector position_at(const Trajectory& traj, const StateLayout& layout, double t);
Vector velocity_at(const Trajectory& traj, const StateLayout& layout, double t);

/// sup over 1000 uniform times in [0, T] of |x_eps(t) - x(t)|. Throws SpanMismatch
/// unless both trajectories cover [0, T] and have the same position dimension.
double tracking_distance(const Trajectory& traj_eps, const StateLayout& layout_eps, const Trajectory& traj_grad,
                         const StateLayout& layout_grad, double T, std::size_t grid = 1000);

/// lhs = int_0^T |x'|^2, rhs = (sup_X0 f - inf f + eps r0^2 / 2) / gamma, slack 1e-6.
InequalityCheck l2_velocity_check(const Trajectory& traj, const StateLayout& layout, double epsilon, double gamma,
                                  double sup_f_X0, double inf_f, double r0);

/// sup over nodes of |x'| against r, no slack. Throws BoxViolation if a node
/// position leaves `box`.
SpeedCheck certify_speed_bound(const Trajectory& traj, const StateLayout& layout, double r, const Box& box);

/// Final position and its classification. Converged means |grad f| <= tol_g and
/// |x'| <= tol_v at every node within the last `dwell` time units.
LimitPoint limit_point(const Trajectory& traj, const StateLayout& layout, const Objective& objective,
                       double tol_g = 1e-9, double tol_v = 1e-9, double dwell = 1.0, double classify_tol = 1e-3);

/// Dissipation identity dF/dt = -gamma |x'|^2 (F = f + eps/2 |v|^2, eps = 0 for
/// the gradient flow), dF/dt by five-point differences of the dense output at
/// interior nodes. Residual scaled by 1 + |x'|^2; slack 1e-5.
ResidualCheck dissipation_check(const Trajectory& traj, const StateLayout& layout, const Objective& objective,
                                double epsilon, double gamma);

/// Largest increase of F between consecutive nodes; slack 1e-9.
ResidualCheck energy_monotone_check(const Trajectory& traj, const StateLayout& layout, const Objective& objective,
                                    double epsilon);

/// d/dt H_alpha(u, x) + a |x'|^2 + b |x''|^2 <= 0 at interior nodes, scaled by
/// 1 + |x'|^2 + |x''|^2; slack 1e-5. Heavy-ball only.
ResidualCheck h_alpha_check(const Trajectory& traj, const HeavyBallProblem& problem, const LengthLemmaConstants& k);

/// |grad H_alpha(u, x)| <= c |x'| + eps |x''| at nodes, absolute slack 1e-7.
/// `c` is passed explicitly.
ResidualCheck grad_h_check(const Trajectory& traj, const HeavyBallProblem& problem, const LengthLemmaConstants& k,
                           double c);

/// Box containing x(t) and x(t) + s v(t) for s in [0, beta_max] at every node,
/// where beta_max bounds beta for any admissible L. Used to choose L for the
/// H_alpha checks.
Box lemma_region(const Trajectory& traj, const HeavyBallProblem& problem);

struct DiagnosticsConfig {
  ode::IntegratorConfig<double> integrator{};  // t_end is the horizon
  bool early_stop = false;
  std::optional<Box> speed_box;  // default: bounding box of the run, padded
  double limit_tol_g = 1e-9;
  double limit_tol_v = 1e-9;
  double limit_dwell = 1.0;
  double classify_tol = 1e-3;
};

struct DiagnosticsReport {
  std::string problem;  // "heavy_ball" or "gradient_flow"
  std::string objective;
  double epsilon = 0.0;
  double gamma = 0.0;
  ode::Termination termination = ode::Termination::ReachedEnd;
  double t_end = 0.0;
  std::size_t nodes = 0;

  ResidualCheck dissipation;
  ResidualCheck energy_monotone;
  InequalityCheck l2_bound;
  SpeedCheck speed_bound;
  std::optional<LengthLemmaConstants> lemma;
  Box lemma_box;
  ResidualCheck h_alpha;
  ResidualCheck grad_H;            // with c_grad_full
  ResidualCheck grad_H_published;  // with c_grad; informational, not part of all_pass
  double length = 0.0;
  LimitPoint limit;
  std::vector<Window> windows;

  /// Every applicable check passed (Vacuous and NotApplicable do not fail).
  bool all_pass() const;
};

/// Integrates once, then runs every applicable check.
DiagnosticsReport full_diagnostics(const HeavyBallProblem& problem, const DiagnosticsConfig& config);
DiagnosticsReport full_diagnostics(const GradientFlowProblem& problem, const DiagnosticsConfig& config);

/// The checks alone, on a trajectory already produced from `problem`.
DiagnosticsReport diagnose(const HeavyBallProblem& problem, const Trajectory& traj, const DiagnosticsConfig& config);
DiagnosticsReport diagnose(const GradientFlowProblem& problem, const Trajectory& traj,
                           const DiagnosticsConfig& config);

/// n unit vectors evenly spaced on the circle, starting at angle `phase`.
std::vector<Vector> circle_directions(std::size_t n, double phase = 0.0);

struct SigmaCell {
  std::size_t x_index = 0;
  std::size_t v_index = 0;
  std::size_t eps_index = 0;
  double epsilon = 0.0;
  std::optional<double> length;
  std::string error;
};

struct SigmaEstimate {
  double sigma = 0.0;
  std::optional<std::size_t> argmax;  // index into cells
  std::vector<SigmaCell> cells;       // ordered by (x, v, eps) index
  std::size_t failed = 0;
};

struct SigmaConfig {
  double gamma = 0.5;
  double horizon = 200.0;
  ode::IntegratorConfig<double> integrator{};
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Max arc length over x0 in X0, v0 in r0 * v_dirs, eps in eps_list. Failed runs
/// are recorded in their cell and skipped.
SigmaEstimate sigma_estimate(const std::vector<Vector>& X0, double r0, const std::vector<Vector>& v_dirs,
                             const std::vector<double>& eps_list, const Objective& objective,
                             const SigmaConfig& config);

struct SweepEntry {
  double epsilon = 0.0;
  DiagnosticsReport report;
  double tracking = 0.0;      // sup distance to the gradient flow on [0, tracking_horizon]
  double length_full = 0.0;   // arc length on [0, horizon]
  double length_half = 0.0;   // arc length on [0, horizon / 2]
};

struct SweepConfig {
  double a = 1.0, b = 0.1, gamma = 0.5;
  std::vector<double> epsilons = {0.1, 0.03, 0.01, 0.003, 0.001};
  double horizon = 200.0;
  double tracking_horizon = 5.0;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  std::size_t sigma_directions = 8;
  unsigned threads = 0;
};

struct SweepResult {
  std::vector<double> epsilons;  // strictly decreasing
  std::vector<SweepEntry> entries;
  DiagnosticsReport gradient_flow;
  SigmaEstimate sigma;

  bool tracking_decreasing() const;
  double tracking_ratio() const;  // final / first
  double max_length_tail() const;
  double median_length() const;
};

/// xy example sweep: per-eps diagnostics, tracking table, length tails and sigma.
SweepResult epsilon_sweep(const SweepConfig& config);

}  // namespace heavyball::analysis
