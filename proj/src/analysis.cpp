#include "heavyball/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "heavyball/example_xy.hpp"

namespace heavyball::analysis {

namespace {

constexpr double kInequalitySlack = 1e-6;
constexpr double kIdentitySlack = 1e-5;
constexpr double kMonotoneSlack = 1e-9;
constexpr double kGradientSlack = 1e-7;

// Five-point derivative of a scalar function of time, with the stencil kept
// well inside the two segments adjacent to node i.
template <typename F>
double node_derivative(const std::vector<double>& ts, std::size_t i, F&& value) {
  const double h = 0.05 * std::min(ts[i] - ts[i - 1], ts[i + 1] - ts[i]);
  const double t = ts[i];
  return (value(t - 2 * h) - 8.0 * value(t - h) + 8.0 * value(t + h) - value(t + 2 * h)) / (12.0 * h);
}

void finish(ResidualCheck& c, double slack) {
  c.slack = slack;
  if (c.samples == 0) {
    c.verdict = Verdict::NotApplicable;
    c.max_residual = 0.0;
    return;
  }
  c.verdict = c.max_residual <= slack ? Verdict::Pass : Verdict::Fail;
}

void record(ResidualCheck& c, double residual, double t) {
  if (!std::isfinite(residual)) residual = std::numeric_limits<double>::infinity();
  if (c.samples == 0 || residual > c.max_residual) {
    c.max_residual = residual;
    c.worst_time = t;
  }
  ++c.samples;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& body) {
  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, count));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

Box bounding_box(const Trajectory& traj, const StateLayout& layout) {
  Box box;
  for (std::size_t i = 0; i < traj.num_nodes(); ++i) box.expand(traj.state(i).head(layout.dimension));
  return box;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::NotApplicable:
      return "not_applicable";
    case Verdict::Vacuous:
      return "vacuous";
  }
  return "fail";
}

Vector position_at(const Trajectory& traj, const StateLayout& layout, double t) {
  return traj(t).head(layout.dimension);
}

Vector velocity_at(const Trajectory& traj, const StateLayout& layout, double t) {
  if (layout.has_velocity) return traj(t).segment(layout.dimension, layout.dimension);
  return traj.rate(t).head(layout.dimension);
}

double tracking_distance(const Trajectory& traj_eps, const StateLayout& layout_eps, const Trajectory& traj_grad,
                         const StateLayout& layout_grad, double T, std::size_t grid) {
  if (layout_eps.dimension != layout_grad.dimension) throw SpanMismatch("position dimensions differ");
  if (!(T > 0)) throw SpanMismatch("horizon must be positive");
  if (grid < 2) throw std::invalid_argument("grid needs at least two points");
  for (const Trajectory* tr : {&traj_eps, &traj_grad}) {
    if (tr->t_begin() != 0.0 || tr->t_end() < T) throw SpanMismatch("trajectory does not span [0, T]");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(grid - 1);
    worst = std::max(worst, (position_at(traj_eps, layout_eps, t) - position_at(traj_grad, layout_grad, t)).norm());
  }
  return worst;
}

InequalityCheck l2_velocity_check(const Trajectory& traj, const StateLayout& layout, double epsilon, double gamma,
                                  double sup_f_X0, double inf_f, double r0) {
  InequalityCheck c;
  const auto& g = traj.field();
  const Index n = layout.dimension;
  c.lhs = ode::integrate_along<double>(
      traj, [&](double t, const Vector& y) { return g(t, y).head(n).squaredNorm(); }, traj.t_begin(),
      traj.t_end(), 1e-8);
  c.rhs = (sup_f_X0 - inf_f + epsilon * r0 * r0 / 2.0) / gamma;
  c.slack = kInequalitySlack;
  c.verdict = InequalityCheck::judge(c.lhs, c.rhs, c.slack);
  return c;
}

SpeedCheck certify_speed_bound(const Trajectory& traj, const StateLayout& layout, double r, const Box& box) {
  SpeedCheck c;
  c.r = r;
  c.box = box;
  const auto& g = traj.field();
  for (std::size_t i = 0; i < traj.num_nodes(); ++i) {
    const auto s = traj.state(i);
    if (!box.contains(Vector(s.head(layout.dimension)))) {
      throw BoxViolation("trajectory leaves the certified box at t = " + std::to_string(traj.times()[i]));
    }
    const double speed = layout.has_velocity ? s.segment(layout.dimension, layout.dimension).norm()
                                             : g(traj.times()[i], s).head(layout.dimension).norm();
    c.sup_v = std::max(c.sup_v, speed);
  }
  c.verdict = c.sup_v <= c.r ? Verdict::Pass : Verdict::Fail;
  return c;
}

LimitPoint limit_point(const Trajectory& traj, const StateLayout& layout, const Objective& objective, double tol_g,
                       double tol_v, double dwell, double classify_tol) {
  LimitPoint lp;
  const std::size_t last = traj.num_nodes() - 1;
  lp.position = traj.state(last).head(layout.dimension);
  const auto& g = traj.field();
  const auto& ts = traj.times();

  bool ok = traj.t_end() - traj.t_begin() >= dwell;
  for (std::size_t i = last + 1; i-- > 0 && ts[i] >= traj.t_end() - dwell;) {
    const auto s = traj.state(i);
    const Vector x = s.head(layout.dimension);
    const double gn = objective.gradient(x).norm();
    const double sp =
        layout.has_velocity ? s.segment(layout.dimension, layout.dimension).norm() : g(ts[i], s).head(layout.dimension).norm();
    if (i == last) {
      lp.grad_norm = gn;
      lp.speed = sp;
    }
    if (gn > tol_g || sp > tol_v) ok = false;
  }
  lp.converged = ok;
  if (objective.name == "xy") lp.kind = classify_critical_point(objective, lp.position, classify_tol);
  return lp;
}

ResidualCheck dissipation_check(const Trajectory& traj, const StateLayout& layout, const Objective& objective,
                                double epsilon, double gamma) {
  ResidualCheck c;
  const Index n = layout.dimension;
  const auto& ts = traj.times();
  const auto energy = [&](double t) {
    const Vector s = traj(t);
    double F = objective.value(s.head(n));
    if (layout.has_velocity) F += 0.5 * epsilon * s.segment(n, n).squaredNorm();
    return F;
  };
  const auto& g = traj.field();
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double dF = node_derivative(ts, i, energy);
    const auto s = traj.state(i);
    const double v2 = layout.has_velocity ? s.segment(n, n).squaredNorm() : g(ts[i], s).head(n).squaredNorm();
    record(c, std::abs(dF + gamma * v2) / (1.0 + v2), ts[i]);
  }
  finish(c, kIdentitySlack);
  return c;
}

ResidualCheck energy_monotone_check(const Trajectory& traj, const StateLayout& layout, const Objective& objective,
                                    double epsilon) {
  ResidualCheck c;
  const Index n = layout.dimension;
  const auto energy = [&](std::size_t i) {
    const auto s = traj.state(i);
    double F = objective.value(s.head(n));
    if (layout.has_velocity) F += 0.5 * epsilon * s.segment(n, n).squaredNorm();
    return F;
  };
  double prev = energy(0);
  for (std::size_t i = 1; i < traj.num_nodes(); ++i) {
    const double cur = energy(i);
    record(c, cur - prev, traj.times()[i]);
    prev = cur;
  }
  finish(c, kMonotoneSlack);
  return c;
}

ResidualCheck h_alpha_check(const Trajectory& traj, const HeavyBallProblem& problem, const LengthLemmaConstants& k) {
  ResidualCheck c;
  const Index n = problem.dimension();
  const auto& ts = traj.times();
  const auto H = [&](double t) {
    const Vector s = traj(t);
    const Vector x = s.head(n);
    const Vector u = x + k.beta * s.segment(n, n);
    return lyapunov_H(u, x, k.alpha, problem.objective);
  };
  for (std::size_t i = 1; i + 1 < ts.size(); ++i) {
    const double dH = node_derivative(ts, i, H);
    const auto s = traj.state(i);
    const Vector x = s.head(n), v = s.segment(n, n);
    const Vector acc = acceleration(problem, x, v);
    const double v2 = v.squaredNorm(), a2 = acc.squaredNorm();
    record(c, (dH + k.a_diss * v2 + k.b_diss * a2) / (1.0 + v2 + a2), ts[i]);
  }
  finish(c, kIdentitySlack);
  return c;
}

ResidualCheck grad_h_check(const Trajectory& traj, const HeavyBallProblem& problem, const LengthLemmaConstants& k,
                           double cst) {
  ResidualCheck c;
  const Index n = problem.dimension();
  for (std::size_t i = 0; i < traj.num_nodes(); ++i) {
    const auto s = traj.state(i);
    const Vector x = s.head(n), v = s.segment(n, n);
    const Vector acc = acceleration(problem, x, v);
    const Vector u = x + k.beta * v;
    const double lhs = lyapunov_H_gradient(u, x, k.alpha, problem.objective).norm();
    const double sv = v.norm(), sa = acc.norm();
    const double rhs = cst * sv + problem.epsilon * sa;
    record(c, lhs - rhs, traj.times()[i]);
  }
  finish(c, kGradientSlack);
  return c;
}

Box lemma_region(const Trajectory& traj, const HeavyBallProblem& problem) {
  const Index n = problem.dimension();
  const double g = problem.gamma;
  const double beta_max = std::min(problem.epsilon / (1.0 + g), std::sqrt(1.0 + g) - 1.0);
  Box box;
  for (std::size_t i = 0; i < traj.num_nodes(); ++i) {
    const auto s = traj.state(i);
    box.expand(s.head(n));
    box.expand(s.head(n) + beta_max * s.segment(n, n));
  }
  return box.padded(0.01, 1e-6);
}

bool DiagnosticsReport::all_pass() const {
  const auto ok = [](Verdict v) { return v != Verdict::Fail; };
  return ok(dissipation.verdict) && ok(energy_monotone.verdict) && ok(l2_bound.verdict) &&
         ok(speed_bound.verdict) && ok(h_alpha.verdict) && ok(grad_H.verdict) &&
         (!limit.kind || limit.converged);
}

namespace {

SpeedCheck speed_for(const Trajectory& traj, const StateLayout& layout, const Objective& objective, double gamma,
                     double epsilon, double r0, const DiagnosticsConfig& config) {
  const Box box = config.speed_box ? *config.speed_box : bounding_box(traj, layout).padded(0.1, 0.1);
  const BoxExtrema ext = sample_box_extrema(objective, box);
  const double inf_f = objective.known_inf ? *objective.known_inf : ext.inf_f;
  const double L = lipschitz_bound_on_box(objective, box);
  const SpeedBound sb = speed_bound(gamma, epsilon, L, r0, ext.sup_f, inf_f, ext.sup_grad);
  try {
    return certify_speed_bound(traj, layout, sb.r, box);
  } catch (const BoxViolation&) {
    SpeedCheck c;
    c.r = sb.r;
    c.box = box;
    c.verdict = Verdict::Vacuous;
    return c;
  }
}

}  // namespace

DiagnosticsReport diagnose(const HeavyBallProblem& problem, const Trajectory& traj, const DiagnosticsConfig& config) {
  problem.validate();
  const Index n = problem.dimension();
  const StateLayout layout = StateLayout::heavy_ball(n);
  const Objective& f = problem.objective;

  DiagnosticsReport r;
  r.problem = "heavy_ball";
  r.objective = f.name;
  r.epsilon = problem.epsilon;
  r.gamma = problem.gamma;
  r.termination = traj.termination();
  r.t_end = traj.t_end();
  r.nodes = traj.num_nodes();
  r.windows.push_back({"run", traj.t_begin(), traj.t_end()});

  r.dissipation = dissipation_check(traj, layout, f, problem.epsilon, problem.gamma);
  r.energy_monotone = energy_monotone_check(traj, layout, f, problem.epsilon);

  const double r0 = problem.v0.norm();
  if (f.known_inf) {
    r.l2_bound = l2_velocity_check(traj, layout, problem.epsilon, problem.gamma, f.value(problem.x0), *f.known_inf, r0);
  }
  r.speed_bound = speed_for(traj, layout, f, problem.gamma, problem.epsilon, r0, config);

  r.lemma_box = lemma_region(traj, problem);
  const double L = lipschitz_bound_on_box(f, r.lemma_box, problem.epsilon);
  r.lemma = length_lemma_constants(problem.gamma, problem.epsilon, L);
  r.h_alpha = h_alpha_check(traj, problem, *r.lemma);
  r.grad_H = grad_h_check(traj, problem, *r.lemma, r.lemma->c_grad_full);
  r.grad_H_published = grad_h_check(traj, problem, *r.lemma, r.lemma->c_grad);

  r.length = ode::arc_length<double>(traj, layout.positions(), traj.t_begin(), traj.t_end());
  r.limit = limit_point(traj, layout, f, config.limit_tol_g, config.limit_tol_v, config.limit_dwell,
                        config.classify_tol);
  return r;
}

DiagnosticsReport diagnose(const GradientFlowProblem& problem, const Trajectory& traj,
                           const DiagnosticsConfig& config) {
  problem.validate();
  const StateLayout layout = StateLayout::gradient_flow(problem.dimension());
  const Objective& f = problem.objective;

  DiagnosticsReport r;
  r.problem = "gradient_flow";
  r.objective = f.name;
  r.gamma = problem.gamma;
  r.termination = traj.termination();
  r.t_end = traj.t_end();
  r.nodes = traj.num_nodes();
  r.windows.push_back({"run", traj.t_begin(), traj.t_end()});

  r.dissipation = dissipation_check(traj, layout, f, 0.0, problem.gamma);
  r.energy_monotone = energy_monotone_check(traj, layout, f, 0.0);
  if (f.known_inf) r.l2_bound = l2_velocity_check(traj, layout, 0.0, problem.gamma, f.value(problem.x0), *f.known_inf, 0.0);
  // Speed, H_alpha and grad H bounds concern the second-order system only.
  r.speed_bound.verdict = Verdict::NotApplicable;
  r.h_alpha.verdict = Verdict::NotApplicable;
  r.grad_H.verdict = Verdict::NotApplicable;
  r.grad_H_published.verdict = Verdict::NotApplicable;

  r.length = ode::arc_length<double>(traj, layout.positions(), traj.t_begin(), traj.t_end());
  r.limit = limit_point(traj, layout, f, config.limit_tol_g, config.limit_tol_v, config.limit_dwell,
                        config.classify_tol);
  return r;
}

DiagnosticsReport full_diagnostics(const HeavyBallProblem& problem, const DiagnosticsConfig& config) {
  ode::IntegratorConfig<double> ic = heavy_ball_config(problem, config.integrator);
  if (config.early_stop) ic.early_stop = heavy_ball_stop(problem, config.limit_tol_g, config.limit_tol_v, config.limit_dwell);
  const Trajectory traj = ode::integrate(heavy_ball_field(problem), problem.initial_state(), ic);
  return diagnose(problem, traj, config);
}

DiagnosticsReport full_diagnostics(const GradientFlowProblem& problem, const DiagnosticsConfig& config) {
  ode::IntegratorConfig<double> ic = config.integrator;
  if (config.early_stop) {
    ic.early_stop = gradient_flow_stop(problem, config.limit_tol_g, config.limit_tol_v, config.limit_dwell);
  }
  const Trajectory traj = ode::integrate(gradient_flow_field(problem), problem.x0, ic);
  return diagnose(problem, traj, config);
}

std::vector<Vector> circle_directions(std::size_t n, double phase) {
  std::vector<Vector> dirs;
  dirs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double th = phase + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    dirs.push_back(Eigen::Vector2d(std::cos(th), std::sin(th)));
  }
  return dirs;
}

SigmaEstimate sigma_estimate(const std::vector<Vector>& X0, double r0, const std::vector<Vector>& v_dirs,
                             const std::vector<double>& eps_list, const Objective& objective,
                             const SigmaConfig& config) {
  if (X0.empty() || v_dirs.empty() || eps_list.empty()) throw std::invalid_argument("sigma grid must be nonempty");
  if (!(r0 >= 0)) throw std::invalid_argument("r0 must be nonnegative");

  SigmaEstimate out;
  const std::size_t nv = v_dirs.size(), ne = eps_list.size();
  out.cells.resize(X0.size() * nv * ne);
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    SigmaCell& c = out.cells[i];
    c.x_index = i / (nv * ne);
    c.v_index = (i / ne) % nv;
    c.eps_index = i % ne;
    c.epsilon = eps_list[c.eps_index];
  }

  parallel_for(out.cells.size(), config.threads, [&](std::size_t i) {
    SigmaCell& c = out.cells[i];
    try {
      HeavyBallProblem p{c.epsilon, config.gamma, X0[c.x_index], r0 * v_dirs[c.v_index], objective};
      ode::IntegratorConfig<double> ic = config.integrator;
      ic.t_end = config.horizon;
      ic = heavy_ball_config(p, ic);
      ic.early_stop = heavy_ball_stop(p);
      const Trajectory traj = ode::integrate(heavy_ball_field(p), p.initial_state(), ic);
      c.length = ode::arc_length<double>(traj, {0, p.dimension()}, traj.t_begin(), traj.t_end());
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  });

  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    const SigmaCell& c = out.cells[i];
    if (!c.length) {
      ++out.failed;
      continue;
    }
    if (!out.argmax || *c.length > out.sigma) {
      out.sigma = *c.length;
      out.argmax = i;
    }
  }
  return out;
}

bool SweepResult::tracking_decreasing() const {
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (!(entries[i].tracking < entries[i - 1].tracking)) return false;
  }
  return true;
}

double SweepResult::tracking_ratio() const {
  if (entries.empty() || entries.front().tracking == 0.0) return 0.0;
  return entries.back().tracking / entries.front().tracking;
}

double SweepResult::max_length_tail() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.length_full - e.length_half);
  return worst;
}

double SweepResult::median_length() const {
  std::vector<double> ls;
  for (const auto& e : entries) ls.push_back(e.length_full);
  if (ls.empty()) return 0.0;
  std::sort(ls.begin(), ls.end());
  const std::size_t m = ls.size() / 2;
  return ls.size() % 2 ? ls[m] : 0.5 * (ls[m - 1] + ls[m]);
}

SweepResult epsilon_sweep(const SweepConfig& config) {
  if (config.epsilons.empty()) throw std::invalid_argument("epsilon list is empty");
  for (std::size_t i = 1; i < config.epsilons.size(); ++i) {
    if (!(config.epsilons[i] < config.epsilons[i - 1])) {
      throw std::invalid_argument("epsilon values must be strictly decreasing");
    }
  }
  if (!(config.tracking_horizon > 0 && config.tracking_horizon <= config.horizon)) {
    throw std::invalid_argument("tracking horizon must lie in (0, horizon]");
  }

  SweepResult out;
  out.epsilons = config.epsilons;
  out.entries.resize(config.epsilons.size());

  ode::IntegratorConfig<double> ic;
  ic.rel_tol = config.rel_tol;
  ic.abs_tol = config.abs_tol;
  ic.t_end = config.horizon;
  ic.forced_times = {config.tracking_horizon, config.horizon / 2.0};

  xy::ExampleInit init{config.a, config.b, config.gamma, config.epsilons.front()};
  DiagnosticsConfig dc;
  dc.integrator = ic;

  const GradientFlowProblem gf = init.gradient_flow();
  const Trajectory gf_traj = ode::integrate(gradient_flow_field(gf), gf.x0, ic);
  out.gradient_flow = diagnose(gf, gf_traj, dc);
  const StateLayout gf_layout = StateLayout::gradient_flow(2);

  parallel_for(out.entries.size(), config.threads, [&](std::size_t i) {
    xy::ExampleInit e = init;
    e.epsilon = config.epsilons[i];
    const HeavyBallProblem p = e.heavy_ball();
    const Trajectory traj = ode::integrate(heavy_ball_field(p), p.initial_state(), heavy_ball_config(p, ic));
    SweepEntry& entry = out.entries[i];
    entry.epsilon = e.epsilon;
    entry.report = diagnose(p, traj, dc);
    entry.tracking = tracking_distance(traj, StateLayout::heavy_ball(2), gf_traj, gf_layout, config.tracking_horizon);
    entry.report.windows.push_back({"tracking", 0.0, config.tracking_horizon});
    entry.length_full = entry.report.length;
    entry.length_half = ode::arc_length<double>(traj, {0, 2}, 0.0, config.horizon / 2.0);
    entry.report.windows.push_back({"length_half", 0.0, config.horizon / 2.0});
  });

  SigmaConfig sc;
  sc.gamma = config.gamma;
  sc.horizon = config.horizon;
  sc.integrator = ic;
  sc.integrator.forced_times.clear();
  sc.threads = config.threads;
  const xy::ExampleInit base{config.a, config.b, config.gamma, config.epsilons.front()};
  out.sigma = sigma_estimate({base.x0()}, base.v0().norm(), circle_directions(config.sigma_directions, std::numbers::pi / 4),
                             config.epsilons, xy_objective(), sc);
  return out;
}

}  // namespace heavyball::analysis
