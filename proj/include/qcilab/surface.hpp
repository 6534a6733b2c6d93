#ifndef QCILAB_SURFACE_HPP
#define QCILAB_SURFACE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qcilab/errors.hpp"
#include "qcilab/quadrature.hpp"

namespace qcilab {

/// A scalar function of one variable together with its first two derivatives.
struct ScalarFunction {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;

  double operator()(double x) const { return value(x); }

  static ScalarFunction constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  }
  static ScalarFunction affine(double c0, double c1) {
    return {[c0, c1](double x) { return c0 + c1 * x; }, [c1](double) { return c1; },
            [](double) { return 0.0; }};
  }

  /// sum_k poly[k] x^k + sum_{k>=1} cos[k-1] cos(kx) + sin[k-1] sin(kx)
  static ScalarFunction series(std::vector<double> poly, std::vector<double> cos_coeffs,
                               std::vector<double> sin_coeffs) {
    auto eval = [poly, cos_coeffs, sin_coeffs](double x, int order) {
      double s = 0.0;
      // polynomial part, differentiated `order` times
      for (std::size_t k = static_cast<std::size_t>(order); k < poly.size(); ++k) {
        double falling = 1.0;
        for (int j = 0; j < order; ++j) falling *= static_cast<double>(k - j);
        s += poly[k] * falling * std::pow(x, static_cast<double>(k) - order);
      }
      for (std::size_t k = 0; k < cos_coeffs.size(); ++k) {
        const double w = static_cast<double>(k + 1);
        const double c = std::cos(w * x);
        const double sn = std::sin(w * x);
        if (order == 0) s += cos_coeffs[k] * c;
        if (order == 1) s -= cos_coeffs[k] * w * sn;
        if (order == 2) s -= cos_coeffs[k] * w * w * c;
      }
      for (std::size_t k = 0; k < sin_coeffs.size(); ++k) {
        const double w = static_cast<double>(k + 1);
        const double c = std::cos(w * x);
        const double sn = std::sin(w * x);
        if (order == 0) s += sin_coeffs[k] * sn;
        if (order == 1) s += sin_coeffs[k] * w * c;
        if (order == 2) s -= sin_coeffs[k] * w * w * sn;
      }
      return s;
    };
    return {[eval](double x) { return eval(x, 0); }, [eval](double x) { return eval(x, 1); },
            [eval](double x) { return eval(x, 2); }};
  }
};

/// Squared-radius profile a(t) of a surface of revolution with metric
/// dt^2 + a(t) dphi^2, t in [0, L]. Near both poles a(t) ~ h0 t^2.
struct ProfileFunction {
  std::string name;
  double domain_length = std::numbers::pi;
  std::function<double(double)> eval;
  std::function<double(double)> eval_d1;
  std::function<double(double)> eval_d2;
  double equator = std::numbers::pi / 2;
  double pole_coefficient = 1.0;
  /// True only for the round unit sphere, where closed-form harmonics apply.
  bool round_sphere = false;

  double a(double t) const { return eval(t); }
  double da(double t) const { return eval_d1(t); }
  double d2a(double t) const { return eval_d2(t); }
};

namespace detail {

/// Extrapolated limit of a(t)/t^2 at t -> 0+ (or (L-t) at the right pole),
/// exact through the quadratic term of the ratio. NaN when the ratio is not
/// close to its limit at the sampling scale (a does not vanish quadratically).
inline double fit_pole_coefficient(const std::function<double(double)>& a, double L, bool right) {
  const double e = 1e-3 * L;
  auto g = [&](double s) {
    const double t = right ? L - s : s;
    return a(t) / (s * s);
  };
  const double g1 = g(e), g2 = g(2.0 * e), g4 = g(4.0 * e);
  const double h = (8.0 * g1 - 6.0 * g2 + g4) / 3.0;
  if (!std::isfinite(h) || std::abs(g1 - g2) > 0.1 * std::abs(h)) return std::numeric_limits<double>::quiet_NaN();
  return h;
}

}  // namespace detail

/// Builds a profile from closed-form evaluators. The pole coefficient is
/// fitted at both ends and must agree; the equator must be interior.
inline ProfileFunction make_profile(std::string name, double L, std::function<double(double)> a,
                                    std::function<double(double)> da,
                                    std::function<double(double)> d2a, double equator) {
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidInput("profile: domain length must be positive");
  if (!(equator > 0.0 && equator < L)) throw InvalidInput("profile: equator must be interior");
  const double h_left = detail::fit_pole_coefficient(a, L, false);
  const double h_right = detail::fit_pole_coefficient(a, L, true);
  if (!(h_left > 0.0) || !(h_right > 0.0)) {
    throw InvalidInput("profile: a(t) must vanish quadratically with positive coefficient at both poles");
  }
  if (std::abs(h_left - h_right) > 1e-6 * std::max(h_left, h_right)) {
    throw InvalidInput("profile: pole coefficients differ at the two poles");
  }
  ProfileFunction p;
  p.name = std::move(name);
  p.domain_length = L;
  p.eval = std::move(a);
  p.eval_d1 = std::move(da);
  p.eval_d2 = std::move(d2a);
  p.equator = equator;
  p.pole_coefficient = 0.5 * (h_left + h_right);
  return p;
}

/// Round unit sphere: a(t) = sin^2 t on [0, pi].
inline ProfileFunction make_sphere_profile() {
  ProfileFunction p = make_profile(
      "sphere", std::numbers::pi, [](double t) { return std::sin(t) * std::sin(t); },
      [](double t) { return std::sin(2.0 * t); }, [](double t) { return 2.0 * std::cos(2.0 * t); },
      std::numbers::pi / 2);
  p.pole_coefficient = 1.0;
  p.round_sphere = true;
  return p;
}

/// a(t) = t^2 (L - t)^2 on [0, L]; equator at L/2, pole coefficient L^2.
inline ProfileFunction make_quartic_profile(double L) {
  if (!(L > 0.0)) throw InvalidInput("quartic profile: L must be positive");
  ProfileFunction p = make_profile(
      "quartic(" + std::to_string(L) + ")", L,
      [L](double t) { return t * t * (L - t) * (L - t); },
      [L](double t) { return 2.0 * t * (L - t) * (L - 2.0 * t); },
      [L](double t) { return 2.0 * (L * L - 6.0 * L * t + 6.0 * t * t); }, L / 2);
  p.pole_coefficient = L * L;
  return p;
}

enum class CurveKind { MeridianGraph, EquatorGraph, ParallelCircle, Equator, Free };

inline const char* to_string(CurveKind k) {
  switch (k) {
    case CurveKind::MeridianGraph: return "MeridianGraph";
    case CurveKind::EquatorGraph: return "EquatorGraph";
    case CurveKind::ParallelCircle: return "ParallelCircle";
    case CurveKind::Equator: return "Equator";
    case CurveKind::Free: return "Free";
  }
  return "Free";
}

struct SurfacePoint {
  double t;
  double phi;
};

/// Parametrized curve tau -> (t(tau), phi(tau)) on the surface.
struct Curve {
  std::string id;
  double tau_a = 0.0;
  double tau_b = 1.0;
  ScalarFunction t;
  ScalarFunction phi;
  CurveKind kind_hint = CurveKind::Free;

  SurfacePoint position(double tau) const { return {t.value(tau), phi.value(tau)}; }
  SurfacePoint velocity(double tau) const { return {t.d1(tau), phi.d1(tau)}; }
  SurfacePoint acceleration(double tau) const { return {t.d2(tau), phi.d2(tau)}; }
  bool contains(double tau) const {
    const double slack = 1e-12 * std::max({1.0, std::abs(tau_a), std::abs(tau_b)});
    return tau >= tau_a - slack && tau <= tau_b + slack;
  }
};

namespace detail {

constexpr int kCurveCheckSamples = 1024;

inline void check_curve(const ProfileFunction& profile, const Curve& c) {
  if (!(c.tau_b > c.tau_a)) throw InvalidInput("curve: empty parameter range");
  const double L = profile.domain_length;
  const double pole_margin = 1e-9 * L;
  for (int i = 0; i <= kCurveCheckSamples; ++i) {
    const double tau = c.tau_a + (c.tau_b - c.tau_a) * i / kCurveCheckSamples;
    const double t = c.t(tau);
    if (!std::isfinite(t) || t < pole_margin || t > L - pole_margin) {
      throw InvalidInput("curve '" + c.id + "' touches or leaves past a pole");
    }
    const double dt = c.t.d1(tau);
    const double dphi = c.phi.d1(tau);
    if (dt * dt + profile.a(t) * dphi * dphi < 1e-12) {
      throw InvalidInput("curve '" + c.id + "' has vanishing velocity");
    }
  }
}

}  // namespace detail

/// Validates a curve against the pole-avoidance and regularity invariants.
inline Curve make_curve(const ProfileFunction& profile, std::string id, double tau_a, double tau_b,
                        ScalarFunction t, ScalarFunction phi, CurveKind kind = CurveKind::Free) {
  Curve c{std::move(id), tau_a, tau_b, std::move(t), std::move(phi), kind};
  detail::check_curve(profile, c);
  return c;
}

/// Meridian phi = phi0, t = tau in [t_a, t_b].
inline Curve make_meridian(const ProfileFunction& profile, double phi0, double t_a, double t_b) {
  return make_curve(profile, "meridian", t_a, t_b, ScalarFunction::affine(0.0, 1.0),
                    ScalarFunction::constant(phi0), CurveKind::MeridianGraph);
}

/// Graph over the meridian: t = tau, phi = phi(tau).
inline Curve make_meridian_graph(const ProfileFunction& profile, double t_a, double t_b,
                                 ScalarFunction phi) {
  return make_curve(profile, "meridian-graph", t_a, t_b, ScalarFunction::affine(0.0, 1.0),
                    std::move(phi), CurveKind::MeridianGraph);
}

/// The equator t = t0, phi = tau in [phi_a, phi_b].
inline Curve make_equator(const ProfileFunction& profile, double phi_a, double phi_b) {
  return make_curve(profile, "equator", phi_a, phi_b, ScalarFunction::constant(profile.equator),
                    ScalarFunction::affine(0.0, 1.0), CurveKind::Equator);
}

/// Parallel circle t = t_c, phi = tau in [phi_a, phi_b].
inline Curve make_parallel(const ProfileFunction& profile, double t_c, double phi_a, double phi_b) {
  const bool is_equator = std::abs(t_c - profile.equator) < 1e-12 * profile.domain_length;
  return make_curve(profile, is_equator ? "equator" : "parallel", phi_a, phi_b,
                    ScalarFunction::constant(t_c), ScalarFunction::affine(0.0, 1.0),
                    is_equator ? CurveKind::Equator : CurveKind::ParallelCircle);
}

/// Graph over the equator: t = theta(tau), phi = tau.
inline Curve make_equator_graph(const ProfileFunction& profile, double tau_a, double tau_b,
                                ScalarFunction theta) {
  return make_curve(profile, "equator-graph", tau_a, tau_b, std::move(theta),
                    ScalarFunction::affine(0.0, 1.0), CurveKind::EquatorGraph);
}

/// Same curve rotated by dphi about the axis of symmetry.
inline Curve rotated(const Curve& c, double dphi) {
  Curve r = c;
  auto v = c.phi.value;
  r.phi.value = [v, dphi](double x) { return v(x) + dphi; };
  r.id = c.id + "+rot";
  return r;
}

/// Sub-arc over [tau_a, tau_b] of the parameter range.
inline Curve subarc(const Curve& c, double tau_a, double tau_b) {
  if (!(tau_a >= c.tau_a && tau_b <= c.tau_b && tau_b > tau_a)) {
    throw DomainError("subarc: range outside the curve");
  }
  Curve r = c;
  r.tau_a = tau_a;
  r.tau_b = tau_b;
  return r;
}

/// ds/dtau = sqrt(t'^2 + a(t) phi'^2).
inline double arc_length_element(const ProfileFunction& profile, const Curve& curve, double tau) {
  if (!curve.contains(tau)) throw DomainError("arc_length_element: tau outside parameter range");
  const SurfacePoint x = curve.position(tau);
  const SurfacePoint v = curve.velocity(tau);
  return std::sqrt(v.t * v.t + profile.a(x.t) * v.phi * v.phi);
}

inline double curve_length(const ProfileFunction& profile, const Curve& curve,
                           std::size_t panels = 64) {
  return composite_gauss(
      [&](double tau) {
        const SurfacePoint x = curve.position(tau);
        const SurfacePoint v = curve.velocity(tau);
        return std::sqrt(v.t * v.t + profile.a(x.t) * v.phi * v.phi);
      },
      curve.tau_a, curve.tau_b, panels);
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double worst_residual = 0.0;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const ValidationCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Checks every profile invariant on a uniform interior grid. Failures are
/// reported, never thrown.
inline ValidationReport validate_profile(const ProfileFunction& p, int grid_size) {
  if (grid_size < 16) throw DomainError("validate_profile: grid_size must be >= 16");
  const double L = p.domain_length;
  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(grid_size) - 1);
  for (int i = 1; i < grid_size; ++i) ts.push_back(L * i / grid_size);

  ValidationReport rep;
  {
    const double r = std::max(std::abs(p.a(0.0)), std::abs(p.a(L)));
    rep.checks.push_back({"endpoint_zero", r < 1e-12, r});
  }
  {
    double amin = std::numeric_limits<double>::infinity();
    for (double t : ts) amin = std::min(amin, p.a(t));
    rep.checks.push_back({"interior_positive", amin > 0.0, amin});
  }
  {
    double amax = 0.0;
    for (double t : ts) amax = std::max(amax, std::abs(p.a(t)));
    const double scale = std::max(amax, 1e-300);
    // sign changes of a', ignoring values at rounding level
    int changes = 0;
    int last_sign = 0;
    for (double t : ts) {
      const double d = p.da(t);
      if (std::abs(d) < 1e-13 * scale / L) continue;
      const int s = d > 0 ? 1 : -1;
      if (last_sign != 0 && s != last_sign) ++changes;
      last_sign = s;
    }
    rep.checks.push_back({"single_interior_maximum", changes == 1, static_cast<double>(changes)});

    const double d1 = std::abs(p.da(p.equator));
    const double d2 = p.d2a(p.equator);
    const bool ok = d1 < 1e-10 * scale / L && d2 < 0.0;
    rep.checks.push_back({"equator_nondegenerate_maximum", ok, d1});

    const double a0 = p.a(p.equator);
    double excess = 0.0;
    for (double t : ts) {
      if (std::abs(t - p.equator) < 1e-12 * L) continue;
      excess = std::max(excess, p.a(t) - a0);
    }
    rep.checks.push_back({"equator_is_global_maximum", excess <= 1e-10 * scale, excess});
  }
  {
    const double h = 1e-5 * L;
    double worst1 = 0.0;
    double worst2 = 0.0;
    double max1 = 0.0;
    double max2 = 0.0;
    for (double t : ts) {
      max1 = std::max(max1, std::abs(p.da(t)));
      max2 = std::max(max2, std::abs(p.d2a(t)));
    }
    for (double t : ts) {
      if (t < 2 * h || t > L - 2 * h) continue;
      const double fd1 = (p.a(t + h) - p.a(t - h)) / (2 * h);
      // second difference of a itself, so a wrong a' cannot mask a wrong a''
      auto dd = [&](double k) { return (p.a(t + k) - 2 * p.a(t) + p.a(t - k)) / (k * k); };
      const double k = std::min(1e-3 * L, 0.5 * std::min(t, L - t));
      const double fd2 = (4 * dd(k) - dd(2 * k)) / 3;
      const double an1 = p.da(t);
      const double an2 = p.d2a(t);
      worst1 = std::max(worst1, std::abs(fd1 - an1) / std::max(std::abs(an1), 1e-2 * max1));
      worst2 = std::max(worst2, std::abs(fd2 - an2) / std::max(std::abs(an2), 1e-2 * max2));
    }
    rep.checks.push_back({"d1_matches_finite_difference", worst1 < 1e-6, worst1});
    rep.checks.push_back({"d2_matches_finite_difference", worst2 < 1e-6, worst2});
  }
  {
    const double hl = detail::fit_pole_coefficient(p.eval, L, false);
    const double hr = detail::fit_pole_coefficient(p.eval, L, true);
    double r = std::max(std::abs(hl - p.pole_coefficient), std::abs(hr - p.pole_coefficient)) /
               p.pole_coefficient;
    if (!std::isfinite(r)) r = std::numeric_limits<double>::infinity();
    rep.checks.push_back({"pole_regularity", r < 1e-6, r});
  }
  return rep;
}

}  // namespace qcilab

#endif  // QCILAB_SURFACE_HPP
