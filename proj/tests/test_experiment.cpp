#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "heavyball/experiment.hpp"

using namespace heavyball;
using namespace heavyball::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("heavyball_test_" + name);
  fs::remove_all(p);
  return p;
}

io::Json read_json(const fs::path& p) {
  std::ifstream is(p);
  return io::Json::parse(is);
}

}  // namespace

TEST(Config, Presets) {
  for (auto p : {Preset::Figure1, Preset::EpsilonSweep, Preset::Claims, Preset::Diagnostics, Preset::Custom}) {
    EXPECT_EQ(parse_preset(to_string(p)), p);
  }
  EXPECT_FALSE(parse_preset("figure2").has_value());
}

TEST(Config, CanonicalRoundTrip) {
  ExperimentConfig c;
  c.preset = Preset::Diagnostics;
  c.a = 0.75;
  c.b = 0.2;
  c.epsilons = {0.05, 0.001};
  c.horizon = 12.5;
  c.out_dir = "results/x";
  c.seed = 42;
  const std::string text = c.canonical();
  EXPECT_EQ(parse_config(text).canonical(), text);
  EXPECT_EQ(text.rfind("preset = diagnostics", 0), 0u);
}

TEST(Config, CommentsAndDefaults) {
  const ExperimentConfig c = parse_config("# reference run\npreset = claims  # inline\n\nepsilon = 0.01\n");
  EXPECT_EQ(c.preset, Preset::Claims);
  EXPECT_EQ(c.objective, "xy");
  EXPECT_EQ(c.epsilons, std::vector<double>{0.01});
  const ExperimentConfig r = c.resolved();
  EXPECT_EQ(*r.horizon, 10.0);
  EXPECT_EQ(ExperimentConfig{}.resolved().epsilons, std::vector<double>{0.01});
  EXPECT_EQ(*ExperimentConfig{}.resolved().horizon, 200.0);
  ExperimentConfig s;
  s.preset = Preset::EpsilonSweep;
  EXPECT_EQ(s.resolved().epsilons.size(), 5u);
}

TEST(Config, ParseErrorsListEveryLine) {
  try {
    parse_config("gamma = 0.5\nnonsense\nwhat = 3\ngamma = abc\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.messages().size(), 3u);
    EXPECT_EQ(e.messages()[0].rfind("line 2:", 0), 0u);
    EXPECT_EQ(e.messages()[1].rfind("line 3:", 0), 0u);
    EXPECT_EQ(e.messages()[2].rfind("line 4:", 0), 0u);
  }
}

TEST(Validate, Errors) {
  ExperimentConfig c;
  c.gamma = -1;
  Validation v = validate(c);
  EXPECT_FALSE(v.ok());
  EXPECT_NE(std::find(v.errors.begin(), v.errors.end(), "gamma must be positive"), v.errors.end());

  c = ExperimentConfig{};
  c.epsilons = {2.0};
  v = validate(c);
  ASSERT_EQ(v.errors.size(), 1u);
  EXPECT_EQ(v.errors[0], "epsilon 2 outside supported range [1e-4, 1]");

  c = ExperimentConfig{};
  c.preset = Preset::EpsilonSweep;
  c.epsilons = {0.01, 0.1};
  EXPECT_FALSE(validate(c).ok());

  c = ExperimentConfig{};
  c.objective = "quadratic";
  EXPECT_FALSE(validate(c).ok());
  c.preset = Preset::Custom;
  EXPECT_TRUE(validate(c).ok());

  c = ExperimentConfig{};
  c.preset = Preset::Claims;
  c.epsilons = {0.02};
  v = validate(c);
  ASSERT_EQ(v.errors.size(), 1u);
  EXPECT_EQ(v.errors[0], "epsilon exceeds γ²/(8a²+8)=0.015625 for a=1, γ=0.5");
}

TEST(Validate, DerivedConstants) {
  const Validation v = validate(ExperimentConfig{});
  ASSERT_TRUE(v.ok());
  EXPECT_EQ(v.derived["sup_f"].get<double>(), 25.0);
  EXPECT_LE(v.derived["gradient_check"].get<double>(), 1e-6);
  const auto& e = v.derived["per_epsilon"][0];
  EXPECT_EQ(e["lemma"]["L"].get<double>(), 26.0);
  EXPECT_NEAR(e["speed_bound"]["r"].get<double>(), 120.91700627126532, 1e-8);
  EXPECT_NEAR(e["envelope"]["c1"].get<double>(), 0.0037139067635410373, 1e-14);
}

TEST(Run, ClaimsAboveThresholdIsAConfigError) {
  ExperimentConfig c;
  c.preset = Preset::Claims;
  c.epsilons = {0.02};
  c.out_dir = scratch("claims02").string();
  std::ostringstream log, err;
  EXPECT_EQ(run(c, log, err), kConfigError);
  const io::Json rec = io::Json::parse(err.str());
  EXPECT_EQ(rec["status"], "config_error");
  EXPECT_EQ(rec["exit_code"], 2);
  EXPECT_EQ(rec["messages"][0], "epsilon exceeds γ²/(8a²+8)=0.015625 for a=1, γ=0.5");
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "error.json"));
}

TEST(Run, ClaimsReferenceRun) {
  ExperimentConfig c;
  c.preset = Preset::Claims;
  c.out_dir = scratch("claims").string();
  std::ostringstream log, err;
  ASSERT_EQ(run(c, log, err), kOk) << err.str();
  const io::Json j = read_json(fs::path(c.out_dir) / "claims.json");
  EXPECT_EQ(j["status"], "pass");
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "heavy_ball_eps0.01.csv"));
}

TEST(Run, DiagnosticsLargeEpsilon) {
  ExperimentConfig c;
  c.preset = Preset::Diagnostics;
  c.epsilons = {0.05};
  c.out_dir = scratch("diag05").string();
  std::ostringstream log, err;
  EXPECT_EQ(run(c, log, err), kOk) << err.str();
  EXPECT_TRUE(err.str().empty());
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "heavy_ball_eps0.05.csv"));
  EXPECT_FALSE(fs::exists(fs::path(c.out_dir) / "error.json"));
}

TEST(Run, Figure1Outputs) {
  ExperimentConfig c;
  c.out_dir = scratch("fig1").string();
  std::ostringstream log, err;
  ASSERT_EQ(run(c, log, err), kOk) << err.str();
  const fs::path out(c.out_dir);
  EXPECT_TRUE(fs::exists(out / "heavy_ball_eps0.01.csv"));
  EXPECT_TRUE(fs::exists(out / "gradient_flow.csv"));
  const io::Json j = read_json(out / "diagnostics.json");
  EXPECT_EQ(j["schema"], io::kReportSchema);
  EXPECT_EQ(j["csv_schema"], io::kCsvSchema);
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["config"]["preset"], "figure1");
}

TEST(Run, Figure1IsReproducible) {
  ExperimentConfig c;
  c.out_dir = scratch("fig1_a").string();
  std::ostringstream log, err;
  ASSERT_EQ(run(c, log, err), kOk);
  ExperimentConfig d = c;
  d.out_dir = scratch("fig1_b").string();
  ASSERT_EQ(run(d, log, err), kOk);
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), {});
  };
  EXPECT_EQ(slurp(fs::path(c.out_dir) / "heavy_ball_eps0.01.csv"), slurp(fs::path(d.out_dir) / "heavy_ball_eps0.01.csv"));
}

TEST(Run, EpsilonOutOfRange) {
  ExperimentConfig c;
  c.preset = Preset::Diagnostics;
  c.epsilons = {1e-5};
  c.out_dir = scratch("range").string();
  std::ostringstream log, err;
  EXPECT_EQ(run(c, log, err), kConfigError);
  EXPECT_NE(err.str().find("outside supported range"), std::string::npos);
}
