#ifndef QCILAB_REPORT_HPP
#define QCILAB_REPORT_HPP

#include <chrono>
#include <cstdio>
#include <ctime>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcilab/asymptotics.hpp"
#include "qcilab/config.hpp"
#include "qcilab/genericity.hpp"
#include "qcilab/momentmap.hpp"
#include "qcilab/restriction.hpp"
#include "qcilab/spectrum.hpp"

namespace qcilab {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest decimal form that round-trips a double, locale-independent.
inline std::string fmt_double(double x) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline json to_json(const CriticalPoint& cp) {
  json j = {{"tau", cp.tau},
            {"omega", cp.omega},
            {"psi_value", cp.psi_value},
            {"hessian", {{cp.hessian.xx, cp.hessian.xy}, {cp.hessian.xy, cp.hessian.yy}}},
            {"det", cp.det},
            {"det_fiber_chart", cp.det_fiber_chart},
            {"gradient_norm", cp.gradient_norm},
            {"parallel_tangency", cp.parallel_tangency},
            {"over_equator", cp.over_equator}};
  if (cp.morse_index)
    j["morse_index"] = *cp.morse_index;
  else
    j["morse_index"] = "Degenerate";
  return j;
}

inline json to_json(const SingularOrbit& o) {
  return {{"t_star", o.t_star}, {"E1", o.E1}, {"E", o.E}, {"stability", to_string(o.stability)},
          {"dimension", o.dimension}};
}

inline json to_json(const CurveClassification& c) {
  json pts = json::array();
  for (const auto& p : c.critical_points) pts.push_back(to_json(p));
  json arcs = json::array();
  for (const auto& a : c.arcs)
    arcs.push_back({{"tau_begin", a.tau_begin}, {"tau_end", a.tau_end}, {"omega", a.omega}, {"cells", a.cells},
                    {"description", a.description}});
  json orbits = json::array();
  for (const auto& o : c.singular_orbits) orbits.push_back(to_json(o));
  const auto& t = c.tolerances;
  return {{"verdict", to_string(c.verdict)},
          {"critical_points", pts},
          {"degenerate_arcs", arcs},
          {"witness", c.witness ? json(*c.witness) : json(nullptr)},
          {"a1_check", c.a1_check},
          {"zero_momentum_branch_roots", c.branch_roots},
          {"singular_orbits", orbits},
          {"warnings", c.warnings},
          {"tolerances",
           {{"deg_tol", t.deg_tol},
            {"a1_tol", t.a1_tol},
            {"grad_tol", t.grad_tol},
            {"grid_tau", t.grid_tau},
            {"grid_omega", t.grid_omega},
            {"dedup_tol", t.dedup_tol},
            {"arc_min_cells", t.arc_min_cells}}}};
}

inline json to_json(const GrowthFit& f) {
  json models = json::array();
  for (const auto& m : f.models)
    models.push_back({{"model", to_string(m.model)},
                      {"coefficients", m.coefficients},
                      {"residual_rms", m.residual_rms},
                      {"eligible", m.eligible}});
  json j = {{"models", models},
            {"best", to_string(f.best)},
            {"dominance", f.dominance},
            {"alpha", f.alpha},
            {"alpha_stderr", f.alpha_stderr},
            {"alpha_ci95", {f.alpha_ci[0], f.alpha_ci[1]}},
            {"sample_count", f.sample_count}};
  j["c_gamma"] = f.lower_bound_cert ? json(*f.lower_bound_cert) : json(nullptr);
  return j;
}

inline json to_json(const SaturationResult& s) {
  return {{"verdict", to_string(s.verdict)},
          {"stability", to_string(s.stability)},
          {"alpha", s.alpha},
          {"c_gamma", s.c_gamma},
          {"unstable_slope", s.unstable_slope},
          {"window_start", s.window_start}};
}

inline json to_json(const ConsistencyReport& r) {
  return {{"status", to_string(r.status)},
          {"classification", to_string(r.classification)},
          {"observed", to_string(r.observed)},
          {"alpha", r.alpha},
          {"expected", r.expected},
          {"evidence", r.evidence}};
}

inline json to_json(const GrowthSeries& s) {
  json samples = json::array();
  for (const auto& x : s.samples)
    samples.push_back({{"m", x.mode.m},
                       {"n", x.mode.n},
                       {"lambda", x.lambda},
                       {"value", x.value},
                       {"quad_error", x.quad_error},
                       {"nodes_used", x.nodes_used}});
  return {{"curve_id", s.curve_id}, {"family", to_string(s.family.kind)}, {"samples", samples}};
}

inline json provenance() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {{"artifact", "qcilab"}, {"version", kVersion}, {"timestamp", buf}};
}

// ---- CSV ----

inline std::string spectrum_csv(const std::vector<JointEigenfunction>& modes) {
  std::ostringstream o;
  o << "m,n,ell_equiv,lambda_sq,hbar,joint_value_2,norm_cert,solver_residual\n";
  for (const auto& e : modes) {
    o << e.index.m << ',' << e.index.n << ',' << (e.ell_equiv ? std::to_string(*e.ell_equiv) : std::string())
      << ',' << fmt_double(e.lambda_sq) << ',' << fmt_double(e.hbar) << ',' << fmt_double(e.joint_values[1]) << ','
      << fmt_double(e.norm_cert) << ',' << fmt_double(e.solver_residual) << '\n';
  }
  return o.str();
}

inline std::string restrict_csv(const GrowthSeries& s) {
  std::ostringstream o;
  o << "m,n,lambda,value,quad_error,nodes_used,curve_id\n";
  for (const auto& x : s.samples)
    o << x.mode.m << ',' << x.mode.n << ',' << fmt_double(x.lambda) << ',' << fmt_double(x.value) << ','
      << fmt_double(x.quad_error) << ',' << x.nodes_used << ',' << x.curve_id << '\n';
  return o.str();
}

/// Parse the `restrict` CSV back into a series.
inline GrowthSeries parse_restrict_csv(std::istream& in) {
  GrowthSeries s;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("restrict csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "m,n,lambda,value,quad_error,nodes_used,curve_id")
    throw InvalidInput("restrict csv: unexpected header '" + line + "'");
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw InvalidInput("restrict csv: row " + std::to_string(row) + " needs 7 fields");
    RestrictionSample x;
    try {
      x.mode = {std::stoi(f[0]), std::stoi(f[1])};
      x.lambda = std::stod(f[2]);
      x.value = std::stod(f[3]);
      x.quad_error = std::stod(f[4]);
      x.nodes_used = std::stol(f[5]);
    } catch (const std::exception&) {
      throw InvalidInput("restrict csv: row " + std::to_string(row) + " has a malformed number");
    }
    x.curve_id = f[6];
    if (s.curve_id.empty()) s.curve_id = x.curve_id;
    s.samples.push_back(x);
  }
  return s;
}

// ---- pipeline ----

struct SweepFitResult {
  CurveClassification classification;
  GrowthSeries series;
  GrowthFit fit;
  SaturationResult saturation;
  ConsistencyReport consistency;
};

/// Whether a family concentrates on the singular orbit (highest weight).
inline bool concentrating_family(const FamilySpec& f) { return f.kind == FamilyKind::HighestWeight; }

inline CurveForMode curve_for_config(const ProfileFunction& p, const RunConfig& c) {
  return [&p, cs = c.curve](const JointEigenfunction& e) { return build_curve(p, cs, e.lambda()); };
}

inline Stability orbit_stability(const ProfileFunction& p, double E1) {
  for (const auto& o : find_singular_orbits(p, E1))
    if (std::abs(o.t_star - p.equator) < 1e-9 * p.domain_length) return o.stability;
  return Stability::Stable;
}

inline SweepFitResult run_sweep_fit(const RunConfig& c, int jobs) {
  const ProfileFunction p = parse_profile(c.profile);
  SweepFitResult r;
  r.classification = classify_curve(p, classification_curve(p, c), c.E1, genericity_options(c));
  r.series = family_sweep(p, curve_for_config(p, c), c.family, jobs, restriction_options(c));
  FitOptions fo;
  fo.seed = c.seed;
  r.fit = fit_growth(r.series, fo);
  r.saturation = saturation_check(r.series, orbit_stability(p, c.E1), fo);
  r.fit.lower_bound_cert = r.saturation.c_gamma;
  r.consistency = theorem_verdict(r.classification.verdict, r.fit, concentrating_family(c.family));
  return r;
}

inline json sweep_fit_report(const RunConfig& c, const SweepFitResult& r) {
  return {{"config", to_json(c)},
          {"classification", to_json(r.classification)},
          {"series", to_json(r.series)},
          {"fit", to_json(r.fit)},
          {"saturation", to_json(r.saturation)},
          {"verdict", to_json(r.consistency)},
          {"provenance", provenance()}};
}

}  // namespace qcilab

#endif  // QCILAB_REPORT_HPP
