#include <charconv>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "heavyball/report_io.hpp"

using namespace heavyball;

namespace {

analysis::Trajectory reference_run(double T = 20.0) {
  const auto p = xy::ExampleInit{}.heavy_ball();
  ode::IntegratorConfig<double> cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  cfg.t_end = T;
  return ode::integrate(heavy_ball_field(p), p.initial_state(), heavy_ball_config(p, cfg));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

TEST(Csv, Header) {
  const std::vector<std::string> h{"t", "x1", "x2", "v1", "v2", "F", "grad_norm"};
  EXPECT_EQ(io::csv_header(2), h);
  EXPECT_EQ(io::csv_header(3).size(), 9u);
}

TEST(Csv, RowsAndEndpoints) {
  const auto traj = reference_run();
  std::ostringstream os;
  io::write_trajectory_csv(os, traj, analysis::StateLayout::heavy_ball(2), xy_objective(), 0.01);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,x1,x2,v1,v2,F,grad_norm");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) rows.push_back(split(line));
  ASSERT_EQ(rows.size(), io::kCsvSamples);
  for (const auto& r : rows) ASSERT_EQ(r.size(), 7u);
  EXPECT_EQ(rows.front()[0], "0");
  EXPECT_EQ(std::stod(rows.back()[0]), 20.0);
  EXPECT_EQ(rows.front()[1], "1");
  EXPECT_EQ(rows.front()[2], "-1");
  EXPECT_NEAR(std::stod(rows.front()[5]), 4.0001, 1e-15);
  EXPECT_NEAR(std::stod(rows.front()[6]), std::sqrt(32.0), 1e-14);
  double prev = -1.0;
  for (const auto& r : rows) {
    const double t = std::stod(r[0]);
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(Csv, GradientFlowUsesTheFieldRate) {
  const auto p = xy::ExampleInit{}.gradient_flow();
  ode::IntegratorConfig<double> cfg;
  cfg.t_end = 2.0;
  const auto traj = ode::integrate(gradient_flow_field(p), p.x0, cfg);
  std::ostringstream os;
  io::write_trajectory_csv(os, traj, analysis::StateLayout::gradient_flow(2), p.objective, 0.0, 5);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  const auto r = split(line);
  EXPECT_EQ(r[3], "-8");
  EXPECT_EQ(r[4], "8");
  EXPECT_EQ(r[5], "4");
}

TEST(Csv, BitwiseDeterministic) {
  std::ostringstream a, b;
  io::write_trajectory_csv(a, reference_run(), analysis::StateLayout::heavy_ball(2), xy_objective(), 0.01);
  io::write_trajectory_csv(b, reference_run(), analysis::StateLayout::heavy_ball(2), xy_objective(), 0.01);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Csv, TooFewSamples) {
  std::ostringstream os;
  EXPECT_THROW(io::write_trajectory_csv(os, reference_run(1.0), analysis::StateLayout::heavy_ball(2), xy_objective(),
                                        0.01, 1),
               std::invalid_argument);
}

TEST(Numbers, ShortestRoundTrip) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(0.01), "0.01");
  EXPECT_EQ(io::format_number(-2.0), "-2");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    const std::string s = io::format_number(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, x) << s;
  }
}

TEST(Json, LemmaKeys) {
  const io::Json j = io::to_json(length_lemma_constants(0.5, 0.01, 1.0));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  const std::vector<std::string> want{"gamma", "epsilon", "L", "beta", "alpha", "a", "b", "c", "c_full", "eta"};
  EXPECT_EQ(keys, want);
  EXPECT_NEAR(j["alpha"].get<double>(), 150.0, 1e-10);
  EXPECT_TRUE(j["eta"].is_null());
}

TEST(Json, DiagnosticsReportLayout) {
  analysis::DiagnosticsConfig cfg;
  cfg.integrator.rel_tol = 1e-10;
  cfg.integrator.abs_tol = 1e-12;
  cfg.integrator.t_end = 200;
  const auto r = analysis::full_diagnostics(xy::ExampleInit{}.heavy_ball(), cfg);
  const io::Json j = io::to_json(r);
  EXPECT_EQ(j["schema"], io::kReportSchema);
  EXPECT_EQ(j["problem"], "heavy_ball");
  EXPECT_EQ(j["limit_point"]["classification"], "Hyperbola");
  EXPECT_EQ(j["dissipation"]["verdict"], "pass");
  EXPECT_EQ(j["all_pass"], true);
  EXPECT_EQ(j["l2_bound"]["rhs"].get<double>(), r.l2_bound.rhs);
  // round-trips through text without loss
  EXPECT_EQ(io::Json::parse(j.dump()), j);
}

TEST(Json, EnvelopeKeys) {
  const io::Json j = io::to_json(xy::envelope_constants(xy::ExampleInit{}));
  EXPECT_EQ(j["r5"].get<double>(), -10.0);
  EXPECT_EQ(j.size(), 10u);
}
