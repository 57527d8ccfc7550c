#include "heavyball/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heavyball/analysis.hpp"
#include "heavyball/example_xy.hpp"

namespace heavyball::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

const std::vector<double> kLadder = {0.1, 0.03, 0.01, 0.003, 0.001};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string join_numbers(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + io::format_number(xs[i]);
  return out;
}

std::string csv_name(double eps) { return "heavy_ball_eps" + io::format_number(eps) + ".csv"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

template <typename Layout>
void write_csv(const fs::path& path, const analysis::Trajectory& traj, const Layout& layout, const Objective& f,
               double eps) {
  std::ostringstream os;
  io::write_trajectory_csv(os, traj, layout, f, eps);
  write_text(path, os.str());
}

Json error_record(const char* status, int code, const std::vector<std::string>& messages) {
  Json j;
  j["schema"] = io::kReportSchema;
  j["status"] = status;
  j["exit_code"] = code;
  j["messages"] = messages;
  return j;
}

int fail_with(const fs::path& out, std::ostream& err, const char* status, int code,
              const std::vector<std::string>& messages) {
  const Json rec = error_record(status, code, messages);
  err << rec.dump() << '\n';
  std::error_code ec;
  fs::create_directories(out, ec);
  if (!ec) {
    std::ofstream os(out / "error.json", std::ios::binary);
    if (os) os << rec.dump(2) << '\n';
  }
  return code;
}

// Lipschitz/speed constants on the reference box [-2, 2]^n.
Json derived_constants(const ExperimentConfig& c, const Objective& f) {
  Json d;
  const Box box = Box::cube(f.dimension, -2.0, 2.0);
  const BoxExtrema ext = sample_box_extrema(f, box);
  const double inf_f = f.known_inf ? *f.known_inf : ext.inf_f;
  const double r0 = std::sqrt(2.0) * c.b;
  d["reference_box"] = io::to_json(box);
  d["sup_f"] = ext.sup_f;
  d["inf_f"] = inf_f;
  d["sup_grad"] = ext.sup_grad;
  d["gradient_check"] = check_gradient(f, box, 64, c.seed);
  Json per = Json::array();
  for (double eps : c.epsilons) {
    Json e;
    e["epsilon"] = eps;
    const double L = lipschitz_bound_on_box(f, box, eps);
    const SpeedBound sb = speed_bound(c.gamma, eps, L, r0, ext.sup_f, inf_f, ext.sup_grad);
    e["lemma"] = io::to_json(length_lemma_constants(c.gamma, eps, L, sb.r));
    e["speed_bound"] = Json{{"r", sb.r}, {"at_epsilon", sb.at_epsilon}, {"argmax_epsilon", sb.argmax_epsilon}};
    if (f.name == "xy") {
      const xy::ExampleInit init{c.a, c.b, c.gamma, eps};
      e["epsilon_threshold"] = init.epsilon_threshold();
      if (eps < init.epsilon_threshold()) {
        e["envelope"] = io::to_json(xy::envelope_constants(init));
      } else {
        e["envelope"] = nullptr;
      }
    }
    per.push_back(e);
  }
  d["per_epsilon"] = per;
  return d;
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["preset"] = to_string(c.preset);
  j["objective"] = c.objective;
  j["a"] = c.a;
  j["b"] = c.b;
  j["gamma"] = c.gamma;
  j["epsilon"] = c.epsilons;
  j["horizon"] = c.horizon ? Json(*c.horizon) : Json(nullptr);
  j["rel_tol"] = c.rel_tol;
  j["abs_tol"] = c.abs_tol;
  j["claims_tol"] = c.claims_tol;
  j["seed"] = c.seed;
  return j;
}

ode::IntegratorConfig<double> integrator_for(const ExperimentConfig& c) {
  ode::IntegratorConfig<double> ic;
  ic.rel_tol = c.rel_tol;
  ic.abs_tol = c.abs_tol;
  ic.t_end = *c.horizon;
  return ic;
}

analysis::DiagnosticsConfig diagnostics_for(const ExperimentConfig& c) {
  analysis::DiagnosticsConfig dc;
  dc.integrator = integrator_for(c);
  return dc;
}

HeavyBallProblem heavy_ball_problem(const ExperimentConfig& c, const Objective& f, double eps) {
  return HeavyBallProblem{eps, c.gamma, Eigen::Vector2d(c.a, -c.a), Eigen::Vector2d(c.b, c.b), f};
}

analysis::Trajectory integrate_heavy_ball(const HeavyBallProblem& p, const ExperimentConfig& c, bool early) {
  ode::IntegratorConfig<double> ic = heavy_ball_config(p, integrator_for(c));
  if (early) ic.early_stop = heavy_ball_stop(p);
  return ode::integrate(heavy_ball_field(p), p.initial_state(), ic);
}

analysis::Trajectory integrate_gradient_flow(const GradientFlowProblem& p, const ExperimentConfig& c, bool early) {
  ode::IntegratorConfig<double> ic = integrator_for(c);
  if (early) ic.early_stop = gradient_flow_stop(p);
  return ode::integrate(gradient_flow_field(p), p.x0, ic);
}

struct Outcome {
  Json document;
  std::vector<std::string> failed;
};

Outcome run_figure1(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  const Objective f = make_objective(c.objective);
  const double eps = c.epsilons.front();
  const HeavyBallProblem hb = heavy_ball_problem(c, f, eps);
  const GradientFlowProblem gf{c.gamma, hb.x0, f};
  const auto dc = diagnostics_for(c);

  const auto hb_traj = integrate_heavy_ball(hb, c, true);
  const auto gf_traj = integrate_gradient_flow(gf, c, true);
  write_csv(out / csv_name(eps), hb_traj, analysis::StateLayout::heavy_ball(2), f, eps);
  write_csv(out / "gradient_flow.csv", gf_traj, analysis::StateLayout::gradient_flow(2), f, 0.0);

  const auto hb_rep = analysis::diagnose(hb, hb_traj, dc);
  const auto gf_rep = analysis::diagnose(gf, gf_traj, dc);
  log << "heavy-ball limit " << io::to_json(hb_rep.limit.position).dump() << " -> "
      << (hb_rep.limit.kind ? to_string(*hb_rep.limit.kind) : "n/a") << '\n';
  log << "gradient-flow limit " << io::to_json(gf_rep.limit.position).dump() << " -> "
      << (gf_rep.limit.kind ? to_string(*gf_rep.limit.kind) : "n/a") << '\n';

  Outcome o;
  o.document["heavy_ball"] = io::to_json(hb_rep);
  o.document["gradient_flow"] = io::to_json(gf_rep);
  if (!hb_rep.all_pass()) o.failed.push_back("heavy_ball_diagnostics");
  if (!gf_rep.all_pass()) o.failed.push_back("gradient_flow_diagnostics");
  if (hb_rep.limit.kind != CriticalKind::Hyperbola) o.failed.push_back("heavy_ball_limit_hyperbola");
  if (gf_rep.limit.kind != CriticalKind::Origin) o.failed.push_back("gradient_flow_limit_origin");
  return o;
}

Outcome run_claims(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  Outcome o;
  Json runs = Json::array();
  for (double eps : c.epsilons) {
    const xy::ExampleInit init{c.a, c.b, c.gamma, eps};
    const xy::EnvelopeSet env = xy::envelope_constants(init);
    const HeavyBallProblem hb = init.heavy_ball();
    const auto traj = integrate_heavy_ball(hb, c, false);
    write_csv(out / csv_name(eps), traj, analysis::StateLayout::heavy_ball(2), hb.objective, eps);
    const xy::ClaimsReport rep = xy::claims_check(traj, init, env, c.claims_tol);

    Json j;
    j["epsilon"] = eps;
    j["envelope"] = io::to_json(env);
    j["identity_residual"] = std::abs((2.0 * env.a + env.c3) * env.r5 - env.c3 * env.r6);
    j["claims"] = io::to_json(rep);
    std::optional<double> F_cross;
    if (rep.t_eps) {
      const Vector s = traj(*rep.t_eps);
      F_cross = total_energy(s.head(2), s.tail(2), eps, hb.objective);
    }
    j["F_at_t_eps"] = F_cross ? Json(*F_cross) : Json(nullptr);
    runs.push_back(j);

    const std::string tag = " (eps=" + io::format_number(eps) + ")";
    log << "claims" << tag << ": window [0, " << rep.window_end << "], " << (rep.all_hold() ? "all hold" : "violated")
        << '\n';
    if (!rep.all_hold()) o.failed.push_back("claims" + tag);
    if (!rep.t_eps) o.failed.push_back("crossing_exists" + tag);
    if (F_cross && *F_cross > 0.5 + 1e-3) o.failed.push_back("crossing_energy" + tag);
  }
  o.document["runs"] = runs;
  return o;
}

Outcome run_diagnostics(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  Outcome o;
  const Objective f = make_objective(c.objective);
  const auto dc = diagnostics_for(c);
  Json reports = Json::array();
  for (double eps : c.epsilons) {
    const HeavyBallProblem hb = heavy_ball_problem(c, f, eps);
    const auto traj = integrate_heavy_ball(hb, c, true);
    write_csv(out / csv_name(eps), traj, analysis::StateLayout::heavy_ball(2), f, eps);
    const auto rep = analysis::diagnose(hb, traj, dc);
    log << "diagnostics (eps=" << io::format_number(eps) << "): " << (rep.all_pass() ? "pass" : "FAIL") << '\n';
    if (!rep.all_pass()) o.failed.push_back("diagnostics (eps=" + io::format_number(eps) + ")");
    reports.push_back(io::to_json(rep));
  }
  o.document["reports"] = reports;
  return o;
}

Outcome run_sweep(const ExperimentConfig& c, const fs::path& out, std::ostream& log) {
  analysis::SweepConfig sc;
  sc.a = c.a;
  sc.b = c.b;
  sc.gamma = c.gamma;
  sc.epsilons = c.epsilons;
  sc.horizon = *c.horizon;
  sc.tracking_horizon = std::min(5.0, *c.horizon);
  sc.rel_tol = c.rel_tol;
  sc.abs_tol = c.abs_tol;
  const analysis::SweepResult res = analysis::epsilon_sweep(sc);

  // CSVs come from fresh runs so that the sweep itself keeps no trajectories.
  const Objective f = xy_objective();
  for (double eps : c.epsilons) {
    const auto traj = integrate_heavy_ball(heavy_ball_problem(c, f, eps), c, false);
    write_csv(out / csv_name(eps), traj, analysis::StateLayout::heavy_ball(2), f, eps);
  }
  const auto gf_traj = integrate_gradient_flow(GradientFlowProblem{c.gamma, Eigen::Vector2d(c.a, -c.a), f}, c, false);
  write_csv(out / "gradient_flow.csv", gf_traj, analysis::StateLayout::gradient_flow(2), f, 0.0);

  Outcome o;
  o.document["sweep"] = io::to_json(res);
  for (const auto& e : res.entries) {
    log << "eps=" << io::format_number(e.epsilon) << " tracking=" << e.tracking << " length=" << e.length_full
        << '\n';
    if (!e.report.all_pass()) o.failed.push_back("diagnostics (eps=" + io::format_number(e.epsilon) + ")");
  }
  if (!res.tracking_decreasing()) o.failed.push_back("tracking_decreasing");
  if (!(res.tracking_ratio() <= 0.2)) o.failed.push_back("tracking_ratio");
  if (!(res.max_length_tail() <= 1e-3)) o.failed.push_back("length_tail");
  if (!(res.sigma.sigma <= 3.0 * res.median_length())) o.failed.push_back("sigma_uniform");
  return o;
}

}  // namespace

const char* to_string(Preset p) {
  switch (p) {
    case Preset::Figure1:
      return "figure1";
    case Preset::EpsilonSweep:
      return "epsilon-sweep";
    case Preset::Claims:
      return "claims";
    case Preset::Diagnostics:
      return "diagnostics";
    case Preset::Custom:
      return "custom";
  }
  return "custom";
}

std::optional<Preset> parse_preset(std::string_view name) {
  for (Preset p : {Preset::Figure1, Preset::EpsilonSweep, Preset::Claims, Preset::Diagnostics, Preset::Custom}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::invalid_argument(messages.empty() ? "invalid configuration" : messages.front()),
      messages_(std::move(messages)) {}

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig c = *this;
  if (c.epsilons.empty()) {
    c.epsilons = c.preset == Preset::EpsilonSweep ? kLadder : std::vector<double>{0.01};
  }
  if (!c.horizon) c.horizon = c.preset == Preset::Claims ? 10.0 : 200.0;
  return c;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "preset = " << to_string(preset) << '\n';
  os << "objective = " << objective << '\n';
  os << "a = " << io::format_number(a) << '\n';
  os << "b = " << io::format_number(b) << '\n';
  os << "gamma = " << io::format_number(gamma) << '\n';
  os << "epsilon = " << join_numbers(epsilons) << '\n';
  os << "horizon = " << (horizon ? io::format_number(*horizon) : "") << '\n';
  os << "rel_tol = " << io::format_number(rel_tol) << '\n';
  os << "abs_tol = " << io::format_number(abs_tol) << '\n';
  os << "claims_tol = " << io::format_number(claims_tol) << '\n';
  os << "out = " << out_dir << '\n';
  os << "seed = " << seed << '\n';
  return os.str();
}

std::optional<std::string> set_field(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  const auto number = [&](double& dst) -> std::optional<std::string> {
    const auto v = parse_double(value);
    if (!v) return std::string(key) + ": not a number: '" + std::string(value) + "'";
    dst = *v;
    return std::nullopt;
  };

  if (key == "preset") {
    const auto p = parse_preset(value);
    if (!p) return "preset: unknown preset '" + std::string(value) + "'";
    c.preset = *p;
    return std::nullopt;
  }
  if (key == "objective") {
    c.objective = value.empty() ? "xy" : std::string(value);
    return std::nullopt;
  }
  if (key == "a") return number(c.a);
  if (key == "b") return number(c.b);
  if (key == "gamma") return number(c.gamma);
  if (key == "rel_tol") return number(c.rel_tol);
  if (key == "abs_tol") return number(c.abs_tol);
  if (key == "claims_tol") return number(c.claims_tol);
  if (key == "epsilon") {
    std::vector<double> eps;
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = parse_double(rest.substr(0, comma));
      if (!item) return "epsilon: not a number list: '" + std::string(value) + "'";
      eps.push_back(*item);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    c.epsilons = std::move(eps);
    return std::nullopt;
  }
  if (key == "horizon") {
    if (value.empty()) {
      c.horizon.reset();
      return std::nullopt;
    }
    double h = 0.0;
    if (auto e = number(h)) return e;
    c.horizon = h;
    return std::nullopt;
  }
  if (key == "out") {
    c.out_dir = std::string(value);
    return std::nullopt;
  }
  if (key == "seed") {
    std::uint64_t s = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), s);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
      return "seed: not an unsigned integer: '" + std::string(value) + "'";
    }
    c.seed = s;
    return std::nullopt;
  }
  return "unknown key '" + std::string(key) + "'";
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    if (auto e = set_field(c, trim(line.substr(0, eq)), line.substr(eq + 1))) {
      errors.push_back("line " + std::to_string(line_no) + ": " + *e);
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

Validation validate(const ExperimentConfig& input) {
  Validation v;
  v.config = input.resolved();
  const ExperimentConfig& c = v.config;
  auto& errors = v.errors;

  if (!(c.gamma > 0)) errors.push_back("gamma must be positive");
  if (!(c.a > 0)) errors.push_back("a must be positive");
  if (!(c.b > 0)) errors.push_back("b must be positive");
  if (!(*c.horizon > 0)) errors.push_back("horizon must be positive");
  if (!(c.rel_tol > 0)) errors.push_back("rel_tol must be positive");
  if (!(c.abs_tol > 0)) errors.push_back("abs_tol must be positive");
  if (!(c.claims_tol >= 0)) errors.push_back("claims_tol must be nonnegative");
  if (c.out_dir.empty()) errors.push_back("out must not be empty");
  for (double eps : c.epsilons) {
    if (!(eps >= 1e-4 && eps <= 1.0)) {
      errors.push_back("epsilon " + io::format_number(eps) + " outside supported range [1e-4, 1]");
    }
  }
  if (c.preset == Preset::EpsilonSweep) {
    for (std::size_t i = 1; i < c.epsilons.size(); ++i) {
      if (!(c.epsilons[i] < c.epsilons[i - 1])) {
        errors.push_back("epsilon-sweep needs strictly decreasing epsilon values");
        break;
      }
    }
    if (!(*c.horizon >= 5.0)) errors.push_back("epsilon-sweep needs horizon >= 5 (tracking window)");
  }

  std::optional<Objective> f;
  try {
    f = make_objective(c.objective);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  if (f && c.preset != Preset::Custom && c.preset != Preset::Diagnostics && f->name != "xy") {
    errors.push_back(std::string("preset ") + to_string(c.preset) + " requires objective xy");
  }

  if (c.preset == Preset::Claims && errors.empty()) {
    for (double eps : c.epsilons) {
      try {
        xy::envelope_constants(xy::ExampleInit{c.a, c.b, c.gamma, eps});
      } catch (const xy::EpsilonTooLarge& e) {
        errors.push_back(e.what());
      }
    }
  }

  if (errors.empty() && f) {
    try {
      v.derived = derived_constants(c, *f);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }
  return v;
}

int run(const ExperimentConfig& config, std::ostream& log, std::ostream& err) {
  const Validation v = validate(config);
  const fs::path out = v.config.out_dir.empty() ? fs::path("out") : fs::path(v.config.out_dir);
  if (!v.ok()) return fail_with(out, err, "config_error", kConfigError, v.errors);
  const ExperimentConfig& c = v.config;

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) return fail_with(out, err, "config_error", kConfigError, {"cannot create output directory: " + ec.message()});
  fs::remove(out / "error.json", ec);

  Outcome o;
  std::string report_name = "diagnostics.json";
  try {
    switch (c.preset) {
      case Preset::Figure1:
        o = run_figure1(c, out, log);
        break;
      case Preset::Claims:
        o = run_claims(c, out, log);
        report_name = "claims.json";
        break;
      case Preset::EpsilonSweep:
        o = run_sweep(c, out, log);
        report_name = "sweep.json";
        break;
      case Preset::Diagnostics:
      case Preset::Custom:
        o = run_diagnostics(c, out, log);
        break;
    }
  } catch (const ode::IntegrationError& e) {
    return fail_with(out, err, "integrator_error", kIntegratorError,
                     {std::string(ode::to_string(e.kind())) + " at t=" + io::format_number(e.time()) + ": " + e.what()});
  } catch (const std::exception& e) {
    return fail_with(out, err, "runtime_error", kIntegratorError, {e.what()});
  }

  Json doc;
  doc["schema"] = io::kReportSchema;
  doc["csv_schema"] = io::kCsvSchema;
  doc["config"] = config_json(c);
  doc["derived"] = v.derived;
  for (auto& [k, val] : o.document.items()) doc[k] = val;
  doc["failed_checks"] = o.failed;
  doc["status"] = o.failed.empty() ? "pass" : "fail";
  write_json(out / report_name, doc);

  if (!o.failed.empty()) return fail_with(out, err, "check_failed", kCheckFailed, o.failed);
  return kOk;
}

}  // namespace heavyball::cli
