#ifndef QCILAB_REPRODUCE_HPP
#define QCILAB_REPRODUCE_HPP

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qcilab/report.hpp"

namespace qcilab {

struct BatteryItem {
  std::string id;
  std::string title;
  bool passed = false;
  json evidence;
  double seconds = 0.0;
};

/// int_0^pi sin^k t dt = sqrt(pi) Gamma((k+1)/2) / Gamma(k/2 + 1).
inline double wallis_integral(int k) {
  return std::sqrt(std::numbers::pi) *
         std::exp(std::lgamma(0.5 * (k + 1.0)) - std::lgamma(0.5 * k + 1.0));
}

/// lambda^{1/2} int_{-1/2}^{1/2} cos(t)^{2 lambda} dt; tends to sqrt(pi).
inline double model_integral(double lambda) {
  const std::size_t panels = static_cast<std::size_t>(std::ceil(4.0 * std::sqrt(lambda))) + 16;
  const double v = composite_gauss(
      [lambda](double t) { return std::exp(2.0 * lambda * std::log(std::cos(t))); }, -0.5, 0.5, panels);
  return std::sqrt(lambda) * v;
}

namespace detail {

template <class F>
BatteryItem timed(std::string id, std::string title, F&& body) {
  BatteryItem it;
  it.id = std::move(id);
  it.title = std::move(title);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(it);
  } catch (const std::exception& e) {
    it.passed = false;
    it.evidence["error"] = e.what();
  }
  it.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return it;
}

inline GrowthSeries sphere_sweep(FamilyKind kind, double lmin, double lmax, int count,
                                 const CurveForMode& curve, int jobs) {
  const ProfileFunction p = make_sphere_profile();
  FamilySpec f;
  f.kind = kind;
  f.lambda_min = lmin;
  f.lambda_max = lmax;
  f.count = count;
  return family_sweep(p, curve, f, jobs);
}

}  // namespace detail

/// The fixed battery of sphere experiments with their oracle targets.
inline std::vector<BatteryItem> run_battery(int jobs, std::uint64_t seed) {
  const double pi = std::numbers::pi;
  const ProfileFunction sphere = make_sphere_profile();
  FitOptions fo;
  fo.seed = seed;
  std::vector<BatteryItem> items;

  items.push_back(detail::timed("a", "meridian genericity, fiber-chart Hessian determinant 4", [&](BatteryItem& it) {
    const Curve c = make_meridian(sphere, 0.0, 0.1, pi - 0.1);
    const CurveClassification cl = classify_curve(sphere, c, 1.0);
    double det = 0.0;
    double fd_rel = 1.0;
    bool found = false;
    const Cylinder cyl{sphere, c, 1.0};
    for (const auto& cp : cl.critical_points) {
      if (std::abs(cp.tau - pi / 2) < 1e-9 && std::abs(cp.omega - pi / 2) < 1e-9) {
        found = true;
        det = cp.det_fiber_chart;
        const Sym2 fd = psi_hessian_fd_values(cyl, cp.tau, cp.omega);
        const double scale = std::max({std::abs(cp.hessian.xx), std::abs(cp.hessian.yy), std::abs(cp.hessian.xy)});
        fd_rel = std::max({std::abs(fd.xx - cp.hessian.xx), std::abs(fd.xy - cp.hessian.xy),
                           std::abs(fd.yy - cp.hessian.yy)}) /
                 scale;
      }
    }
    it.evidence = {{"verdict", to_string(cl.verdict)}, {"det_fiber_chart", det}, {"target", 4.0},
                   {"fd_relative_difference", fd_rel}, {"critical_point_found", found}};
    it.passed = cl.verdict == Verdict::Generic && found && std::abs(det - 4.0) < 1e-6 && fd_rel < 1e-6;
  }));

  items.push_back(detail::timed("b", "equator and parallel non-genericity", [&](BatteryItem& it) {
    const CurveClassification eq = classify_curve(sphere, make_equator(sphere, 0.0, 2.0 * pi), 1.0);
    const CurveClassification par = classify_curve(sphere, make_parallel(sphere, pi / 3, 0.0, 2.0 * pi), 1.0);
    it.evidence = {{"equator", to_string(eq.verdict)},
                   {"equator_witness", eq.witness ? *eq.witness : std::string()},
                   {"parallel_pi_over_3", to_string(par.verdict)}};
    it.passed = eq.verdict == Verdict::NonGenericSingularOrbit && eq.witness.has_value() &&
                par.verdict == Verdict::NonGenericCaustic;
  }));

  items.push_back(detail::timed("c", "zonal logarithmic law on the pole-windowed meridian", [&](BatteryItem& it) {
    const GrowthSeries s = detail::sphere_sweep(
        FamilyKind::Zonal, 100, 3000, 12,
        [&](const JointEigenfunction& e) { return make_pole_windowed_meridian(sphere, 0.0, e.lambda()); }, jobs);
    const GrowthFit f = fit_growth(s, fo);
    const double slope = f.fit(GrowthModel::Log).coefficients[1];
    const double target = 1.0 / (pi * pi);
    it.evidence = {{"best", to_string(f.best)}, {"dominance", f.dominance}, {"slope", slope}, {"target", target},
                   {"relative_error", std::abs(slope / target - 1.0)}};
    it.passed = f.best == GrowthModel::Log && f.dominance >= 0.10 && std::abs(slope / target - 1.0) < 0.15;
  }));

  items.push_back(detail::timed("d", "highest-weight boundedness on a meridian", [&](BatteryItem& it) {
    const Curve c = make_meridian(sphere, 0.0, pi / 4, 3 * pi / 4);
    const GrowthSeries s = detail::sphere_sweep(
        FamilyKind::HighestWeight, 50, 2000, 12, [&](const JointEigenfunction&) { return c; }, jobs);
    const GrowthFit f = fit_growth(s, fo);
    const double limit = f.fit(GrowthModel::Constant).coefficients[0];
    const double target = 1.0 / (2.0 * pi);
    it.evidence = {{"best", to_string(f.best)}, {"limit", limit}, {"target", target},
                   {"relative_error", std::abs(limit / target - 1.0)}};
    it.passed = f.best == GrowthModel::Constant && std::abs(limit / target - 1.0) < 0.05;
  }));

  items.push_back(detail::timed("e", "highest-weight saturation on the equator", [&](BatteryItem& it) {
    const Curve c = make_equator(sphere, 0.0, 2.0 * pi);
    const GrowthSeries s = detail::sphere_sweep(
        FamilyKind::HighestWeight, 50, 2000, 12, [&](const JointEigenfunction&) { return c; }, jobs);
    const GrowthFit f = fit_growth(s, fo);
    const SaturationResult sat = saturation_check(s, Stability::Stable, fo);
    double wallis_dev = 0.0;
    for (const auto& x : s.samples)
      wallis_dev = std::max(wallis_dev, std::abs(x.value * wallis_integral(2 * x.mode.m + 1) - 1.0));
    const double target = 1.0 / std::sqrt(pi);
    it.evidence = {{"best", to_string(f.best)},         {"alpha", f.alpha},
                   {"saturation", to_string(sat.verdict)}, {"c_gamma", sat.c_gamma},
                   {"target", target},                   {"relative_error", std::abs(sat.c_gamma / target - 1.0)},
                   {"max_wallis_deviation", wallis_dev}};
    it.passed = f.best == GrowthModel::Power && std::abs(f.alpha - 0.5) <= 0.05 &&
                sat.verdict == SaturationVerdict::Saturated && std::abs(sat.c_gamma / target - 1.0) < 0.05 &&
                wallis_dev < 1e-6;
  }));

  items.push_back(detail::timed("f", "model integral lambda^{1/2} int cos^{2 lambda} -> sqrt(pi)", [&](BatteryItem& it) {
    json ladder = json::array();
    for (double lam : {25.0, 100.0, 400.0, 1600.0}) ladder.push_back({{"lambda", lam}, {"value", model_integral(lam)}});
    const double v = model_integral(400.0);
    const double target = std::sqrt(pi);
    it.evidence = {{"value_at_400", v}, {"target", target}, {"relative_error", std::abs(v / target - 1.0)},
                   {"ladder", ladder}};
    it.passed = std::abs(v / target - 1.0) < 0.005;
  }));

  return items;
}

}  // namespace qcilab

#endif  // QCILAB_REPRODUCE_HPP
