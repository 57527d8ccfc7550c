#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heavyball/analysis.hpp"
#include "heavyball/example_xy.hpp"

namespace heavyball::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCsvSchema = "heavyball-trajectory/1";
inline constexpr const char* kReportSchema = "heavyball-report/1";
inline constexpr std::size_t kCsvSamples = 2000;

/// t, x1..xn, v1..vn, F, grad_norm
std::vector<std::string> csv_header(Index dimension);

/// Writes `samples` uniformly spaced rows over the trajectory span. For the
/// gradient flow the velocity columns hold x' from the field and F = f.
void write_trajectory_csv(std::ostream& os, const analysis::Trajectory& traj, const analysis::StateLayout& layout,
                          const Objective& objective, double epsilon, std::size_t samples = kCsvSamples);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

Json to_json(const Vector& v);
Json to_json(const Box& box);
Json to_json(const LengthLemmaConstants& k);
Json to_json(const xy::EnvelopeSet& env);
Json to_json(const xy::ClaimsReport& claims);
Json to_json(const analysis::DiagnosticsReport& report);
Json to_json(const analysis::SigmaEstimate& sigma);
Json to_json(const analysis::SweepResult& sweep);

}  // namespace heavyball::io
