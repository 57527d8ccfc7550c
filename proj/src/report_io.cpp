#include "heavyball/report_io.hpp"

#include <array>
#include <charconv>

namespace heavyball::io {

namespace {

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json residual_json(const analysis::ResidualCheck& c) {
  Json j;
  j["max_residual"] = c.max_residual;
  j["slack"] = c.slack;
  j["samples"] = c.samples;
  j["worst_time"] = optional_json(c.worst_time);
  j["verdict"] = analysis::to_string(c.verdict);
  j["pass"] = c.pass();
  return j;
}

Json claim_json(const xy::ClaimVerdict& v) {
  Json j;
  j["name"] = v.name;
  j["holds"] = v.holds;
  j["max_violation"] = v.max_violation;
  j["first_violation"] = optional_json(v.first_violation);
  j["samples"] = v.samples;
  return j;
}

}  // namespace

std::vector<std::string> csv_header(Index dimension) {
  std::vector<std::string> h{"t"};
  for (Index i = 1; i <= dimension; ++i) h.push_back("x" + std::to_string(i));
  for (Index i = 1; i <= dimension; ++i) h.push_back("v" + std::to_string(i));
  h.push_back("F");
  h.push_back("grad_norm");
  return h;
}

std::string format_number(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void write_trajectory_csv(std::ostream& os, const analysis::Trajectory& traj, const analysis::StateLayout& layout,
                          const Objective& objective, double epsilon, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("need at least two CSV samples");
  const auto header = csv_header(layout.dimension);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';

  const double t0 = traj.t_begin(), t1 = traj.t_end();
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = k + 1 == samples ? t1 : t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
    const Vector x = analysis::position_at(traj, layout, t);
    const Vector v = analysis::velocity_at(traj, layout, t);
    const double F = objective.value(x) + (layout.has_velocity ? 0.5 * epsilon * v.squaredNorm() : 0.0);
    os << format_number(t);
    for (Index i = 0; i < x.size(); ++i) os << ',' << format_number(x[i]);
    for (Index i = 0; i < v.size(); ++i) os << ',' << format_number(v[i]);
    os << ',' << format_number(F) << ',' << format_number(objective.gradient(x).norm()) << '\n';
  }
}

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Json to_json(const Box& box) {
  Json j;
  j["lower"] = to_json(box.lower);
  j["upper"] = to_json(box.upper);
  return j;
}

Json to_json(const LengthLemmaConstants& k) {
  Json j;
  j["gamma"] = k.gamma;
  j["epsilon"] = k.epsilon;
  j["L"] = k.L;
  j["beta"] = k.beta;
  j["alpha"] = k.alpha;
  j["a"] = k.a_diss;
  j["b"] = k.b_diss;
  j["c"] = k.c_grad;
  j["c_full"] = k.c_grad_full;
  j["eta"] = optional_json(k.eta);
  return j;
}

Json to_json(const xy::EnvelopeSet& env) {
  Json j;
  j["a"] = env.a;
  j["c1"] = env.c1;
  j["c2"] = env.c2;
  j["c3"] = env.c3;
  j["r1"] = env.r1;
  j["r2"] = env.r2;
  j["r3"] = env.r3;
  j["r4"] = env.r4;
  j["r5"] = env.r5;
  j["r6"] = env.r6;
  return j;
}

Json to_json(const xy::ClaimsReport& c) {
  Json j;
  j["window"] = {0.0, c.window_end};
  j["t_eps"] = optional_json(c.t_eps);
  j["T1"] = optional_json(c.T1);
  j["T2"] = optional_json(c.T2);
  j["T3"] = optional_json(c.T3);
  j["tol"] = c.tol;
  j["claims"] = Json::array({claim_json(c.claim1), claim_json(c.claim3), claim_json(c.claim4),
                             claim_json(c.claim5), claim_json(c.xy_monotone), claim_json(c.u_monotone)});
  j["all_hold"] = c.all_hold();
  return j;
}

Json to_json(const analysis::DiagnosticsReport& r) {
  Json j;
  j["schema"] = kReportSchema;
  j["problem"] = r.problem;
  j["objective"] = r.objective;
  j["epsilon"] = r.epsilon;
  j["gamma"] = r.gamma;
  j["termination"] = ode::to_string(r.termination);
  j["t_end"] = r.t_end;
  j["nodes"] = r.nodes;
  j["dissipation"] = residual_json(r.dissipation);
  j["energy_monotone"] = residual_json(r.energy_monotone);

  Json l2;
  l2["lhs"] = r.l2_bound.lhs;
  l2["rhs"] = r.l2_bound.rhs;
  l2["slack"] = r.l2_bound.slack;
  l2["verdict"] = analysis::to_string(r.l2_bound.verdict);
  l2["pass"] = r.l2_bound.pass();
  j["l2_bound"] = l2;

  Json sp;
  sp["sup_v"] = r.speed_bound.sup_v;
  sp["r"] = r.speed_bound.r;
  sp["box"] = r.speed_bound.box.dimension() ? to_json(r.speed_bound.box) : Json(nullptr);
  sp["verdict"] = analysis::to_string(r.speed_bound.verdict);
  sp["pass"] = r.speed_bound.pass();
  j["speed_bound"] = sp;

  j["lemma"] = r.lemma ? to_json(*r.lemma) : Json(nullptr);
  j["lemma_box"] = r.lemma_box.dimension() ? to_json(r.lemma_box) : Json(nullptr);
  j["h_alpha"] = residual_json(r.h_alpha);
  j["grad_H"] = residual_json(r.grad_H);
  j["grad_H_published"] = residual_json(r.grad_H_published);
  j["length"] = r.length;

  Json lp;
  lp["position"] = to_json(r.limit.position);
  lp["classification"] = r.limit.kind ? Json(to_string(*r.limit.kind)) : Json(nullptr);
  lp["converged"] = r.limit.converged;
  lp["grad_norm"] = r.limit.grad_norm;
  lp["speed"] = r.limit.speed;
  j["limit_point"] = lp;

  Json ws = Json::array();
  for (const auto& w : r.windows) ws.push_back(Json{{"name", w.name}, {"begin", w.begin}, {"end", w.end}});
  j["windows"] = ws;
  j["all_pass"] = r.all_pass();
  return j;
}

Json to_json(const analysis::SigmaEstimate& s) {
  Json j;
  j["sigma"] = s.sigma;
  j["argmax"] = optional_json(s.argmax);
  j["failed"] = s.failed;
  Json cells = Json::array();
  for (const auto& c : s.cells) {
    Json cj;
    cj["x_index"] = c.x_index;
    cj["v_index"] = c.v_index;
    cj["epsilon"] = c.epsilon;
    cj["length"] = optional_json(c.length);
    if (!c.error.empty()) cj["error"] = c.error;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  return j;
}

Json to_json(const analysis::SweepResult& s) {
  Json j;
  j["schema"] = kReportSchema;
  j["epsilons"] = s.epsilons;
  Json table = Json::array();
  for (const auto& e : s.entries) {
    table.push_back(Json{{"epsilon", e.epsilon},
                         {"tracking", e.tracking},
                         {"length_full", e.length_full},
                         {"length_half", e.length_half}});
  }
  j["tracking_table"] = table;
  j["tracking_decreasing"] = s.tracking_decreasing();
  j["tracking_ratio"] = s.tracking_ratio();
  j["max_length_tail"] = s.max_length_tail();
  j["median_length"] = s.median_length();
  j["sigma"] = to_json(s.sigma);
  j["gradient_flow"] = to_json(s.gradient_flow);
  Json reports = Json::array();
  for (const auto& e : s.entries) reports.push_back(to_json(e.report));
  j["reports"] = reports;
  return j;
}

}  // namespace heavyball::io
