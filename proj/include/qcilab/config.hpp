#ifndef QCILAB_CONFIG_HPP
#define QCILAB_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcilab/errors.hpp"
#include "qcilab/genericity.hpp"
#include "qcilab/restriction.hpp"
#include "qcilab/spectrum.hpp"
#include "qcilab/surface.hpp"

namespace qcilab {

using json = nlohmann::json;

/// Coefficients of a ScalarFunction::series.
struct SeriesSpec {
  std::vector<double> poly;
  std::vector<double> cos;
  std::vector<double> sin;
  bool operator==(const SeriesSpec&) const = default;
};

struct CurveSpec {
  std::string kind = "meridian";  // meridian | equator | parallel | graph
  double phi0 = 0.0;
  double t_a = 0.0;
  double t_b = std::numbers::pi;
  bool pole_window = true;  // meridian: trim [1/lambda, L - 1/lambda]
  double phi_a = 0.0;
  double phi_b = 2.0 * std::numbers::pi;
  double t_c = std::numbers::pi / 3.0;
  double tau_a = 0.0;
  double tau_b = 1.0;
  SeriesSpec t;
  SeriesSpec phi;
  bool operator==(const CurveSpec&) const = default;
};

struct ToleranceSpec {
  double deg_tol = 1e-8;
  double a1_tol = 1e-8;
  double grad_tol = 1e-9;
  int grid = 128;
  double quad_rel_tol = 1e-6;
  double points_per_wavelength = 20.0;
  bool operator==(const ToleranceSpec&) const = default;
};

struct RunConfig {
  std::string profile = "sphere";
  CurveSpec curve;
  FamilySpec family;
  double E1 = 1.0;
  ToleranceSpec tolerances;
  std::uint64_t seed = 0;
  std::string output_dir;
  bool operator==(const RunConfig&) const = default;
};

inline ProfileFunction parse_profile(const std::string& s) {
  if (s == "sphere") return make_sphere_profile();
  if (s == "quartic") return make_quartic_profile(std::numbers::pi);
  static const std::regex quartic(R"(\s*quartic\s*\(\s*([-+0-9.eE]+)\s*\)\s*)");
  std::smatch m;
  if (std::regex_match(s, m, quartic)) {
    double L = 0.0;
    try {
      std::size_t used = 0;
      L = std::stod(m[1].str(), &used);
      if (used != m[1].str().size()) throw InvalidInput("bad number");
    } catch (const std::exception&) {
      throw InvalidInput("profile: cannot parse quartic length in '" + s + "'");
    }
    return make_quartic_profile(L);
  }
  throw InvalidInput("profile: expected 'sphere' or 'quartic(L)', got '" + s + "'");
}

inline const char* family_name(FamilyKind k) { return to_string(k); }

inline FamilyKind parse_family_kind(const std::string& s) {
  if (s == "zonal") return FamilyKind::Zonal;
  if (s == "highest_weight") return FamilyKind::HighestWeight;
  if (s == "fixed_ratio") return FamilyKind::FixedRatio;
  throw InvalidInput("family.kind: expected zonal, highest_weight or fixed_ratio, got '" + s + "'");
}

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw InvalidInput(where + ": unknown key '" + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(where + "." + key + ": wrong type");
  }
}

inline json series_to_json(const SeriesSpec& s) { return {{"poly", s.poly}, {"cos", s.cos}, {"sin", s.sin}}; }

inline SeriesSpec series_from_json(const json& j, const std::string& where) {
  reject_unknown(j, {"poly", "cos", "sin"}, where);
  SeriesSpec s;
  read(j, "poly", s.poly, where);
  read(j, "cos", s.cos, where);
  read(j, "sin", s.sin, where);
  return s;
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
  const CurveSpec& cs = c.curve;
  json curve = {{"kind", cs.kind},       {"phi0", cs.phi0},   {"t_a", cs.t_a},
                {"t_b", cs.t_b},         {"pole_window", cs.pole_window},
                {"phi_a", cs.phi_a},     {"phi_b", cs.phi_b}, {"t_c", cs.t_c},
                {"tau_a", cs.tau_a},     {"tau_b", cs.tau_b},
                {"t", detail::series_to_json(cs.t)},
                {"phi", detail::series_to_json(cs.phi)}};
  json family = {{"kind", to_string(c.family.kind)},
                 {"lambda_min", c.family.lambda_min},
                 {"lambda_max", c.family.lambda_max},
                 {"count", c.family.count},
                 {"ratio", c.family.ratio}};
  return {{"profile", c.profile},
          {"curve", curve},
          {"family", family},
          {"E1", c.E1},
          {"tolerances",
           {{"deg_tol", c.tolerances.deg_tol},
            {"a1_tol", c.tolerances.a1_tol},
            {"grad_tol", c.tolerances.grad_tol},
            {"grid", c.tolerances.grid},
            {"quad_rel_tol", c.tolerances.quad_rel_tol},
            {"points_per_wavelength", c.tolerances.points_per_wavelength}}},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

/// Parse a configuration; every field is optional and unknown keys are errors.
inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  detail::reject_unknown(j, {"profile", "curve", "family", "E1", "tolerances", "seed", "output_dir"}, "config");
  detail::read(j, "profile", c.profile, "config");
  detail::read(j, "E1", c.E1, "config");
  detail::read(j, "seed", c.seed, "config");
  detail::read(j, "output_dir", c.output_dir, "config");
  if (j.contains("curve")) {
    const json& cj = j.at("curve");
    detail::reject_unknown(cj, {"kind", "phi0", "t_a", "t_b", "pole_window", "phi_a", "phi_b", "t_c", "tau_a",
                                "tau_b", "t", "phi"},
                           "curve");
    CurveSpec& cs = c.curve;
    detail::read(cj, "kind", cs.kind, "curve");
    if (cs.kind != "meridian" && cs.kind != "equator" && cs.kind != "parallel" && cs.kind != "graph")
      throw InvalidInput("curve.kind: expected meridian, equator, parallel or graph, got '" + cs.kind + "'");
    detail::read(cj, "phi0", cs.phi0, "curve");
    detail::read(cj, "t_a", cs.t_a, "curve");
    detail::read(cj, "t_b", cs.t_b, "curve");
    detail::read(cj, "pole_window", cs.pole_window, "curve");
    detail::read(cj, "phi_a", cs.phi_a, "curve");
    detail::read(cj, "phi_b", cs.phi_b, "curve");
    detail::read(cj, "t_c", cs.t_c, "curve");
    detail::read(cj, "tau_a", cs.tau_a, "curve");
    detail::read(cj, "tau_b", cs.tau_b, "curve");
    if (cj.contains("t")) cs.t = detail::series_from_json(cj.at("t"), "curve.t");
    if (cj.contains("phi")) cs.phi = detail::series_from_json(cj.at("phi"), "curve.phi");
  }
  if (j.contains("family")) {
    const json& fj = j.at("family");
    detail::reject_unknown(fj, {"kind", "ratio", "lambda_min", "lambda_max", "count"}, "family");
    std::string kind = to_string(c.family.kind);
    detail::read(fj, "kind", kind, "family");
    c.family.kind = parse_family_kind(kind);
    detail::read(fj, "ratio", c.family.ratio, "family");
    detail::read(fj, "lambda_min", c.family.lambda_min, "family");
    detail::read(fj, "lambda_max", c.family.lambda_max, "family");
    detail::read(fj, "count", c.family.count, "family");
  }
  if (j.contains("tolerances")) {
    const json& tj = j.at("tolerances");
    detail::reject_unknown(tj, {"deg_tol", "a1_tol", "grad_tol", "grid", "quad_rel_tol", "points_per_wavelength"},
                           "tolerances");
    ToleranceSpec& t = c.tolerances;
    detail::read(tj, "deg_tol", t.deg_tol, "tolerances");
    detail::read(tj, "a1_tol", t.a1_tol, "tolerances");
    detail::read(tj, "grad_tol", t.grad_tol, "tolerances");
    detail::read(tj, "grid", t.grid, "tolerances");
    detail::read(tj, "quad_rel_tol", t.quad_rel_tol, "tolerances");
    detail::read(tj, "points_per_wavelength", t.points_per_wavelength, "tolerances");
    if (t.grid < 8) throw InvalidInput("tolerances.grid must be at least 8");
    if (!(t.quad_rel_tol > 0.0) || !(t.points_per_wavelength > 0.0))
      throw InvalidInput("tolerances: quadrature targets must be positive");
  }
  validate_family(c.family);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return RunConfig{};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline GenericityOptions genericity_options(const RunConfig& c) {
  GenericityOptions o;
  o.deg_tol = c.tolerances.deg_tol;
  o.a1_tol = c.tolerances.a1_tol;
  o.grad_tol = c.tolerances.grad_tol;
  o.grid_tau = c.tolerances.grid;
  o.grid_omega = c.tolerances.grid;
  return o;
}

inline RestrictionOptions restriction_options(const RunConfig& c) {
  RestrictionOptions o;
  o.rel_tol = c.tolerances.quad_rel_tol;
  o.points_per_wavelength = c.tolerances.points_per_wavelength;
  return o;
}

/// Curve of the configuration for a member with frequency lambda (the pole
/// window of a meridian depends on it). lambda <= 0 means no window.
inline Curve build_curve(const ProfileFunction& p, const CurveSpec& cs, double lambda) {
  const double L = p.domain_length;
  if (cs.kind == "meridian") {
    double ta = cs.t_a;
    double tb = cs.t_b;
    if (cs.pole_window && lambda > 0.0) {
      ta = std::max(ta, 1.0 / lambda);
      tb = std::min(tb, L - 1.0 / lambda);
    }
    if (!(ta >= 0.0 && tb <= L && tb > ta)) throw InvalidInput("curve: meridian range outside [0, L]");
    Curve c = make_meridian(p, cs.phi0, ta, tb);
    c.id = cs.pole_window ? "meridian_windowed" : "meridian";
    return c;
  }
  if (cs.kind == "equator") return make_equator(p, cs.phi_a, cs.phi_b);
  if (cs.kind == "parallel") return make_parallel(p, cs.t_c, cs.phi_a, cs.phi_b);
  if (cs.kind == "graph") {
    if (cs.t.poly.empty() && cs.t.cos.empty() && cs.t.sin.empty())
      throw InvalidInput("curve: graph needs coefficients for t(tau)");
    return make_curve(p, "graph", cs.tau_a, cs.tau_b, ScalarFunction::series(cs.t.poly, cs.t.cos, cs.t.sin),
                      ScalarFunction::series(cs.phi.poly, cs.phi.cos, cs.phi.sin));
  }
  throw InvalidInput("curve: unknown kind '" + cs.kind + "'");
}

/// Curve used for the genericity test: the shortest member curve (window at lambda_min).
inline Curve classification_curve(const ProfileFunction& p, const RunConfig& c) {
  return build_curve(p, c.curve, c.family.lambda_min);
}

}  // namespace qcilab

#endif  // QCILAB_CONFIG_HPP
