#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heavyball/experiment.hpp"

namespace {

namespace hc = heavyball::cli;

struct Overrides {
  std::string config_file;
  std::optional<std::string> preset, objective, epsilon, out;
  std::optional<double> gamma, a, b, horizon, rel_tol, abs_tol;
  std::optional<std::uint64_t> seed;
};

void add_options(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_file, "flat key = value config file");
  app.add_option("--preset", o.preset, "figure1 | epsilon-sweep | claims | diagnostics | custom");
  app.add_option("--objective", o.objective, "objective name (default xy)");
  app.add_option("--epsilon", o.epsilon, "epsilon or comma-separated list");
  app.add_option("--gamma", o.gamma, "friction coefficient");
  app.add_option("--a", o.a, "initial position (a, -a)");
  app.add_option("--b", o.b, "initial velocity (b, b)");
  app.add_option("--horizon", o.horizon, "final time");
  app.add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
  app.add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance");
  app.add_option("--seed", o.seed, "seed for sampled checks");
  app.add_option("--out", o.out, "output directory");
}

// Config file, then the environment override, then flags.
hc::ExperimentConfig assemble(const Overrides& o) {
  hc::ExperimentConfig c = o.config_file.empty() ? hc::ExperimentConfig{} : hc::load_config_file(o.config_file);
  if (const char* env = std::getenv(hc::kOutDirEnv); env && *env) c.out_dir = env;

  std::vector<std::string> errors;
  const auto set = [&](const char* key, const std::string& value) {
    if (auto e = hc::set_field(c, key, value)) errors.push_back(*e);
  };
  const auto num = [](double x) { return heavyball::io::format_number(x); };
  if (o.preset) set("preset", *o.preset);
  if (o.objective) set("objective", *o.objective);
  if (o.epsilon) set("epsilon", *o.epsilon);
  if (o.gamma) set("gamma", num(*o.gamma));
  if (o.a) set("a", num(*o.a));
  if (o.b) set("b", num(*o.b));
  if (o.horizon) set("horizon", num(*o.horizon));
  if (o.rel_tol) set("rel_tol", num(*o.rel_tol));
  if (o.abs_tol) set("abs_tol", num(*o.abs_tol));
  if (o.seed) set("seed", std::to_string(*o.seed));
  if (o.out) set("out", *o.out);
  if (!errors.empty()) throw hc::ConfigError(errors);
  return c;
}

void print_config_error(const hc::ConfigError& e) {
  heavyball::io::Json rec;
  rec["schema"] = heavyball::io::kReportSchema;
  rec["status"] = "config_error";
  rec["exit_code"] = static_cast<int>(hc::kConfigError);
  rec["messages"] = e.messages();
  std::cerr << rec.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavy-ball vs gradient-flow experiments"};
  app.require_subcommand(1);

  Overrides run_opts, validate_opts;
  CLI::App* run = app.add_subcommand("run", "run a preset and write CSV/JSON artifacts");
  add_options(*run, run_opts);
  CLI::App* validate = app.add_subcommand("validate", "print the canonical config and derived constants");
  add_options(*validate, validate_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(hc::kConfigError);
  }

  try {
    if (run->parsed()) {
      const hc::ExperimentConfig c = assemble(run_opts);
      return hc::run(c, std::cout, std::cerr);
    }
    const hc::ExperimentConfig c = assemble(validate_opts);
    const hc::Validation v = hc::validate(c);
    if (!v.ok()) {
      print_config_error(hc::ConfigError(v.errors));
      return hc::kConfigError;
    }
    std::cout << v.config.canonical();
    std::cout << v.derived.dump(2) << '\n';
    return hc::kOk;
  } catch (const hc::ConfigError& e) {
    print_config_error(e);
    return hc::kConfigError;
  }
}
