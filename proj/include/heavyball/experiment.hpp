#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "heavyball/report_io.hpp"

namespace heavyball::cli {

enum class Preset { Figure1, EpsilonSweep, Claims, Diagnostics, Custom };
const char* to_string(Preset p);
std::optional<Preset> parse_preset(std::string_view name);

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kIntegratorError = 3 };

/// Environment variable that overrides the output directory of a config file
/// (command-line flags still win).
inline constexpr const char* kOutDirEnv = "HEAVYBALL_OUT_DIR";

struct ExperimentConfig {
  Preset preset = Preset::Figure1;
  std::string objective = "xy";
  double a = 1.0;
  double b = 0.1;
  double gamma = 0.5;
  std::vector<double> epsilons;   // empty: preset default
  std::optional<double> horizon;  // empty: preset default
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double claims_tol = 1e-6;
  std::string out_dir = "out";
  std::uint64_t seed = 0;

  /// Copy with the preset defaults filled in.
  ExperimentConfig resolved() const;
  /// One "key = value" line per field, fixed key order.
  std::string canonical() const;
};

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

/// Sets one field from its textual form. Returns an error message on failure.
std::optional<std::string> set_field(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat "key = value" text; '#' starts a comment. Throws ConfigError listing
/// every malformed line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

struct Validation {
  ExperimentConfig config;  // resolved
  std::vector<std::string> errors;
  io::Json derived;  // envelope set, lemma constants, speed bound per epsilon

  bool ok() const { return errors.empty(); }
};

Validation validate(const ExperimentConfig& config);

/// Runs the preset, writes its CSV and JSON files under out_dir and returns the
/// exit code. Failures also produce error.json and a one-line JSON record on `err`.
int run(const ExperimentConfig& config, std::ostream& log, std::ostream& err);

}  // namespace heavyball::cli
