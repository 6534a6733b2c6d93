#ifndef QCILAB_RESTRICTION_HPP
#define QCILAB_RESTRICTION_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qcilab/errors.hpp"
#include "qcilab/quadrature.hpp"
#include "qcilab/spectrum.hpp"
#include "qcilab/surface.hpp"

namespace qcilab {

/// One restriction integral int_gamma |phi|^2 ds.
struct RestrictionSample {
  ModeIndex mode;
  double lambda = 0.0;
  double value = 0.0;
  double quad_error = 0.0;
  long nodes_used = 0;
  std::string curve_id;
};

struct RestrictionOptions {
  double rel_tol = 1e-6;       // successive-refinement stopping criterion
  double points_per_wavelength = 20.0;
  int max_doublings = 16;
  int range_probe = 257;       // samples used to check the curve stays in (0, L)
};

namespace detail {

inline void check_curve_in_range(const Curve& curve, double L, int probes) {
  for (int k = 0; k < probes; ++k) {
    const double tau = curve.tau_a + (curve.tau_b - curve.tau_a) * k / (probes - 1);
    const double t = curve.t.value(tau);
    if (!(t >= 0.0 && t <= L))
      throw DomainError("restrict_integrate: curve '" + curve.id + "' leaves the radial range at tau=" +
                        std::to_string(tau));
  }
}

}  // namespace detail

/// int |f(t(tau))|^2 |gamma'(tau)| dtau by composite 16-point Gauss panels,
/// doubling the panel count until two successive values agree. The angular
/// factor e^{i m phi} has unit modulus and drops out.
inline RestrictionSample restrict_integrate(const ProfileFunction& profile, const Curve& curve,
                                            const JointEigenfunction& phi,
                                            const RestrictionOptions& opt = {}) {
  if (std::abs(phi.domain_length - profile.domain_length) > 1e-12 * profile.domain_length)
    throw DomainError("restrict_integrate: eigenfunction was computed on a different profile");
  detail::check_curve_in_range(curve, profile.domain_length, opt.range_probe);

  const double len = curve_length(profile, curve);
  const double lam = phi.lambda();
  auto integrand = [&](double tau) {
    const double v = phi.f(curve.t.value(tau));
    return v * v * arc_length_element(profile, curve, tau);
  };

  std::size_t panels = static_cast<std::size_t>(
      std::ceil(opt.points_per_wavelength * (1.0 + lam * len) / 16.0));
  panels = std::max<std::size_t>(panels, 1);
  long nodes = 0;
  double prev = composite_gauss(integrand, curve.tau_a, curve.tau_b, panels);
  nodes += static_cast<long>(16 * panels);
  for (int k = 0; k < opt.max_doublings; ++k) {
    panels *= 2;
    const double cur = composite_gauss(integrand, curve.tau_a, curve.tau_b, panels);
    nodes += static_cast<long>(16 * panels);
    const double diff = std::abs(cur - prev);
    if (diff <= opt.rel_tol * std::abs(cur)) {
      RestrictionSample s;
      s.mode = phi.index;
      s.lambda = lam;
      s.value = std::max(cur, 0.0);
      s.quad_error = diff;
      s.nodes_used = nodes;
      s.curve_id = curve.id;
      return s;
    }
    prev = cur;
  }
  throw SolverError("restrict_integrate: no convergence on curve '" + curve.id + "' for m=" +
                    std::to_string(phi.index.m) + ", n=" + std::to_string(phi.index.n));
}

/// Meridian with the pole windows of width 1/lambda removed at both ends.
inline Curve make_pole_windowed_meridian(const ProfileFunction& profile, double phi0, double lambda) {
  const double L = profile.domain_length;
  const double d = lambda > 0.0 ? 1.0 / lambda : 0.0;
  if (!(2.0 * d < L)) throw DomainError("pole-windowed meridian: 1/lambda too large for the profile");
  Curve c = make_meridian(profile, phi0, d, L - d);
  c.id = "meridian_windowed";
  return c;
}

/// Restriction values of a family along one curve family.
struct GrowthSeries {
  std::string curve_id;
  FamilySpec family;
  std::vector<RestrictionSample> samples;
};

/// A sweep member failed; the samples computed before the failure are kept.
class SweepError : public std::runtime_error {
 public:
  SweepError(const std::string& what, GrowthSeries partial, std::size_t failed_index)
      : std::runtime_error(what), partial_(std::move(partial)), failed_index_(failed_index) {}
  const GrowthSeries& partial() const { return partial_; }
  std::size_t failed_index() const { return failed_index_; }

 private:
  GrowthSeries partial_;
  std::size_t failed_index_;
};

using CurveForMode = std::function<Curve(const JointEigenfunction&)>;

namespace detail {

/// Run `work(i)` for i in [0, n) on `jobs` threads; one exception per index is kept.
template <class Work>
std::vector<std::exception_ptr> parallel_for(std::size_t n, int jobs, Work&& work) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return errors;
}

inline GrowthSeries assemble_sweep(std::string curve_id, const FamilySpec& family,
                                   std::vector<std::optional<RestrictionSample>> results,
                                   const std::vector<std::exception_ptr>& errors) {
  GrowthSeries out;
  out.curve_id = std::move(curve_id);
  out.family = family;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (errors[i]) {
      std::string msg = "family_sweep: member " + std::to_string(i) + " failed";
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        msg += ": ";
        msg += e.what();
      } catch (...) {
      }
      for (auto& r : results)
        if (r) out.samples.push_back(*r);
      std::stable_sort(out.samples.begin(), out.samples.end(),
                       [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
      throw SweepError(msg, std::move(out), i);
    }
  }
  for (auto& r : results) out.samples.push_back(*r);
  std::stable_sort(out.samples.begin(), out.samples.end(),
                   [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  return out;
}

}  // namespace detail

/// Restrict every eigenfunction to a curve chosen per member (e.g. the
/// pole-windowed meridian, whose window depends on lambda).
inline GrowthSeries family_sweep(const ProfileFunction& profile, const CurveForMode& curve_for,
                                 const std::vector<JointEigenfunction>& family,
                                 const FamilySpec& spec = {}, int jobs = 1,
                                 const RestrictionOptions& opt = {}) {
  if (family.empty()) throw InvalidInput("family_sweep: empty family");
  std::vector<std::optional<RestrictionSample>> results(family.size());
  std::string curve_id = curve_for(family.front()).id;
  auto errors = detail::parallel_for(family.size(), jobs, [&](std::size_t i) {
    results[i] = restrict_integrate(profile, curve_for(family[i]), family[i], opt);
  });
  return detail::assemble_sweep(std::move(curve_id), spec, std::move(results), errors);
}

inline GrowthSeries family_sweep(const ProfileFunction& profile, const Curve& curve,
                                 const std::vector<JointEigenfunction>& family,
                                 const FamilySpec& spec = {}, int jobs = 1,
                                 const RestrictionOptions& opt = {}) {
  return family_sweep(
      profile, [&curve](const JointEigenfunction&) { return curve; }, family, spec, jobs, opt);
}

/// Solve and restrict each member of a family on the worker threads.
inline GrowthSeries family_sweep(const ProfileFunction& profile, const CurveForMode& curve_for,
                                 const FamilySpec& spec, int jobs = 1,
                                 const RestrictionOptions& opt = {}, const SlOptions& sl = {}) {
  const std::vector<ModeIndex> modes = family_modes(profile, spec);
  std::vector<std::optional<RestrictionSample>> results(modes.size());
  std::vector<std::string> ids(modes.size());
  auto errors = detail::parallel_for(modes.size(), jobs, [&](std::size_t i) {
    const JointEigenfunction e = solve_mode(profile, modes[i], sl);
    const Curve c = curve_for(e);
    ids[i] = c.id;
    results[i] = restrict_integrate(profile, c, e, opt);
  });
  std::string id;
  for (const auto& s : ids)
    if (!s.empty()) {
      id = s;
      break;
    }
  return detail::assemble_sweep(std::move(id), spec, std::move(results), errors);
}

}  // namespace qcilab

#endif  // QCILAB_RESTRICTION_HPP
