#ifndef QCILAB_MOMENTMAP_HPP
#define QCILAB_MOMENTMAP_HPP

#include <array>
#include <cmath>
#include <vector>

#include "qcilab/errors.hpp"
#include "qcilab/surface.hpp"

namespace qcilab {

/// Covector (xi_t, xi_phi) at the surface point (t, phi).
struct PhasePoint {
  double t;
  double phi;
  double xi_t;
  double xi_phi;
};

/// Values of p1 = xi_t^2 + xi_phi^2 / a(t) and p2 = xi_phi^2.
struct MomentValue {
  double p1;
  double p2;
};

/// Differential of a function on T*M in the coordinate order (t, phi, xi_t, xi_phi).
using Covector4 = std::array<double, 4>;

inline MomentValue eval_moment_map(const ProfileFunction& profile, const PhasePoint& z) {
  const double a = profile.a(z.t);
  return {z.xi_t * z.xi_t + z.xi_phi * z.xi_phi / a, z.xi_phi * z.xi_phi};
}

inline Covector4 dp1(const ProfileFunction& profile, const PhasePoint& z) {
  const double a = profile.a(z.t);
  const double da = profile.da(z.t);
  return {-da * z.xi_phi * z.xi_phi / (a * a), 0.0, 2.0 * z.xi_t, 2.0 * z.xi_phi / a};
}

inline Covector4 dp2(const ProfileFunction&, const PhasePoint& z) {
  return {0.0, 0.0, 0.0, 2.0 * z.xi_phi};
}

/// Root-sum-square of all 2x2 minors of the 2x4 Jacobian of (p1, p2);
/// zero exactly on the set where dp1 and dp2 are dependent.
inline double wedge_determinant(const ProfileFunction& profile, const PhasePoint& z) {
  const Covector4 u = dp1(profile, z);
  const Covector4 v = dp2(profile, z);
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double m = u[i] * v[j] - u[j] * v[i];
      s += m * m;
    }
  return std::sqrt(s);
}

/// Zero-momentum branch xi_phi = 0: p2 vanishes there to second order, so it
/// is a degenerate locus of p2 that carries no joint orbit.
inline bool on_zero_momentum_branch(const PhasePoint& z, double tol = 1e-12) {
  return std::abs(z.xi_phi) <= tol;
}

enum class Stability { Stable, Unstable };

inline const char* to_string(Stability s) { return s == Stability::Stable ? "Stable" : "Unstable"; }

/// Lift of the parallel t = t_star with xi_t = 0 and xi_phi^2 = a(t_star) E1.
struct SingularOrbit {
  double t_star;
  double E1;
  double E;  // value of p2 on the orbit
  Stability stability;
  int dimension = 1;

  PhasePoint point(double phi, int sign = 1) const {
    return {t_star, phi, 0.0, sign * std::sqrt(E)};
  }
};

/// Singular joint orbits at energy E1, one per interior critical point of a.
inline std::vector<SingularOrbit> find_singular_orbits(const ProfileFunction& profile, double E1) {
  if (!(E1 > 0.0)) throw DomainError("find_singular_orbits: E1 must be positive");
  const ValidationReport rep = validate_profile(profile, 512);
  if (!rep.passed()) throw InvalidInput("find_singular_orbits: profile fails Morse validation");

  const double L = profile.domain_length;
  constexpr int kGrid = 4096;
  std::vector<SingularOrbit> orbits;
  double prev_t = L / kGrid;
  double prev_d = profile.da(prev_t);
  for (int i = 2; i < kGrid; ++i) {
    const double t = L * i / kGrid;
    const double d = profile.da(t);
    double root = -1.0;
    if (d == 0.0) {
      root = t;
    } else if (prev_d != 0.0 && (d > 0) != (prev_d > 0)) {
      double lo = prev_t;
      double hi = t;
      double flo = prev_d;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * L; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = profile.da(mid);
        if ((fm > 0) == (flo > 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      root = 0.5 * (lo + hi);
    }
    if (root > 0.0) {
      // the declared equator is exact; prefer it over the bisected root
      if (std::abs(root - profile.equator) < 1e-8 * L) root = profile.equator;
      const double a0 = profile.a(root);
      const Stability s = profile.d2a(root) < 0.0 ? Stability::Stable : Stability::Unstable;
      orbits.push_back({root, E1, a0 * E1, s});
    }
    prev_t = t;
    prev_d = d;
  }
  return orbits;
}

/// Hamilton's equations for p1: d/ds (t, phi, xi_t, xi_phi).
inline std::array<double, 4> hamilton_p1(const ProfileFunction& profile, const PhasePoint& z) {
  const double a = profile.a(z.t);
  const double da = profile.da(z.t);
  return {2.0 * z.xi_t, 2.0 * z.xi_phi / a, da * z.xi_phi * z.xi_phi / (a * a), 0.0};
}

/// Classical RK4 flow of H_{p1} for `duration` with fixed `step`.
inline PhasePoint flow_p1(const ProfileFunction& profile, PhasePoint z, double duration,
                          double step) {
  const int n = static_cast<int>(std::ceil(duration / step - 1e-9));
  const double h = duration / n;
  auto add = [](const PhasePoint& p, const std::array<double, 4>& k, double s) {
    return PhasePoint{p.t + s * k[0], p.phi + s * k[1], p.xi_t + s * k[2], p.xi_phi + s * k[3]};
  };
  for (int i = 0; i < n; ++i) {
    const auto k1 = hamilton_p1(profile, z);
    const auto k2 = hamilton_p1(profile, add(z, k1, 0.5 * h));
    const auto k3 = hamilton_p1(profile, add(z, k2, 0.5 * h));
    const auto k4 = hamilton_p1(profile, add(z, k3, h));
    std::array<double, 4> k;
    for (int j = 0; j < 4; ++j) k[j] = (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]) / 6.0;
    z = add(z, k, h);
  }
  return z;
}

}  // namespace qcilab

#endif  // QCILAB_MOMENTMAP_HPP
