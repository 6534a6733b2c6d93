#ifndef QCILAB_GENERICITY_HPP
#define QCILAB_GENERICITY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcilab/errors.hpp"
#include "qcilab/momentmap.hpp"
#include "qcilab/surface.hpp"

namespace qcilab {

struct GenericityOptions {
  double deg_tol = 1e-8;       // |det| at or below counts as degenerate
  double a1_tol = 1e-8;
  double grad_tol = 1e-9;      // Newton convergence certificate
  int grid_tau = 128;
  int grid_omega = 128;
  double dedup_tol = 1e-6;
  int arc_min_cells = 8;
  int newton_max_iter = 50;
  // dPsi/domega = E1 a sin(2 omega), so every root sits at a multiple of pi/2;
  // roots with |sin omega| below this lie on the xi_phi = 0 branch. Loose on
  // purpose: near the poles a(t) is tiny and Newton stops early in omega.
  double branch_tol = 1e-3;
};

/// Energy shell p1 = E1 over a curve, charted by (tau, omega) with
/// xi_t = sqrt(E1) cos omega, xi_phi = sqrt(a(t(tau)) E1) sin omega.
struct Cylinder {
  ProfileFunction profile;
  Curve curve;
  double E1 = 1.0;

  PhasePoint chart(double tau, double omega) const {
    const SurfacePoint x = curve.position(tau);
    const double s = std::sqrt(E1);
    return {x.t, x.phi, s * std::cos(omega), std::sqrt(profile.a(x.t) * E1) * std::sin(omega)};
  }
  /// d chart / d tau, in (t, phi, xi_t, xi_phi) components.
  Covector4 chart_dtau(double tau, double omega) const {
    const SurfacePoint x = curve.position(tau);
    const SurfacePoint v = curve.velocity(tau);
    const double a = profile.a(x.t);
    const double dxi_phi = std::sqrt(E1) * std::sin(omega) * profile.da(x.t) * v.t /
                           (2.0 * std::sqrt(a));
    return {v.t, v.phi, 0.0, dxi_phi};
  }
  Covector4 chart_domega(double tau, double omega) const {
    const double a = profile.a(curve.t(tau));
    const double s = std::sqrt(E1);
    return {0.0, 0.0, -s * std::sin(omega), std::sqrt(a * E1) * std::cos(omega)};
  }
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  std::array<double, 2> eigenvalues() const {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return {m - r, m + r};
  }
};

/// Psi = p2 restricted to the cylinder, evaluated through the moment map.
inline double psi(const Cylinder& cyl, double tau, double omega) {
  return eval_moment_map(cyl.profile, cyl.chart(tau, omega)).p2;
}

/// Closed form a(t)(E1 - xi_t^2) in the (t, xi_t) chart for curves that are
/// graphs over a meridian or over the equator (including parallels).
inline std::optional<double> psi_closed_form(const Cylinder& cyl, double tau, double omega) {
  switch (cyl.curve.kind_hint) {
    case CurveKind::MeridianGraph:
    case CurveKind::EquatorGraph:
    case CurveKind::ParallelCircle:
    case CurveKind::Equator: {
      const double xi_t = std::sqrt(cyl.E1) * std::cos(omega);
      return cyl.profile.a(cyl.curve.t(tau)) * (cyl.E1 - xi_t * xi_t);
    }
    case CurveKind::Free: return std::nullopt;
  }
  return std::nullopt;
}

/// Chain-rule gradient of E1 a(t(tau)) sin^2 omega.
inline std::array<double, 2> psi_gradient(const Cylinder& cyl, double tau, double omega) {
  const double t = cyl.curve.t(tau);
  const double dt = cyl.curve.t.d1(tau);
  const double s = std::sin(omega);
  return {cyl.E1 * cyl.profile.da(t) * dt * s * s,
          cyl.E1 * cyl.profile.a(t) * std::sin(2.0 * omega)};
}

inline Sym2 psi_hessian(const Cylinder& cyl, double tau, double omega) {
  const double t = cyl.curve.t(tau);
  const double dt = cyl.curve.t.d1(tau);
  const double d2t = cyl.curve.t.d2(tau);
  const double s = std::sin(omega);
  const ProfileFunction& p = cyl.profile;
  return {cyl.E1 * (p.d2a(t) * dt * dt + p.da(t) * d2t) * s * s,
          cyl.E1 * p.da(t) * dt * std::sin(2.0 * omega),
          2.0 * cyl.E1 * p.a(t) * std::cos(2.0 * omega)};
}

/// Central differences of the analytic gradient.
inline Sym2 psi_hessian_fd_gradient(const Cylinder& cyl, double tau, double omega,
                                    double h = 1e-5) {
  const auto gp = psi_gradient(cyl, tau + h, omega);
  const auto gm = psi_gradient(cyl, tau - h, omega);
  const auto hp = psi_gradient(cyl, tau, omega + h);
  const auto hm = psi_gradient(cyl, tau, omega - h);
  return {(gp[0] - gm[0]) / (2 * h), 0.25 * ((gp[1] - gm[1]) + (hp[0] - hm[0])) / h,
          (hp[1] - hm[1]) / (2 * h)};
}

/// Second differences of Psi values only, Richardson-extrapolated in h.
inline Sym2 psi_hessian_fd_values(const Cylinder& cyl, double tau, double omega,
                                  double h = 1e-3) {
  auto f = [&](double dx, double dy) { return psi(cyl, tau + dx, omega + dy); };
  auto second = [&](double step) {
    const double f0 = f(0, 0);
    Sym2 r;
    r.xx = (f(step, 0) - 2 * f0 + f(-step, 0)) / (step * step);
    r.yy = (f(0, step) - 2 * f0 + f(0, -step)) / (step * step);
    r.xy = (f(step, step) - f(step, -step) - f(-step, step) + f(-step, -step)) / (4 * step * step);
    return r;
  };
  const Sym2 a = second(h);
  const Sym2 b = second(2 * h);
  return {(4 * a.xx - b.xx) / 3, (4 * a.xy - b.xy) / 3, (4 * a.yy - b.yy) / 3};
}

struct CriticalPoint {
  double tau = 0.0;
  double omega = 0.0;
  double psi_value = 0.0;
  Sym2 hessian;           // in (tau, omega)
  double det = 0.0;
  double det_fiber_chart = 0.0;  // determinant in the (tau, xi_t) chart
  std::optional<int> morse_index;  // empty: degenerate
  double gradient_norm = 0.0;
  bool parallel_tangency = false;  // t'(tau) = 0: curve tangent to a parallel
  bool over_equator = false;       // a'(t(tau)) = 0
};

/// Interval of tau along which dPsi vanishes identically at fixed omega.
struct DegenerateArc {
  double tau_begin = 0.0;
  double tau_end = 0.0;
  double omega = 0.0;
  int cells = 0;
  std::string description;
};

struct CriticalSearch {
  std::vector<CriticalPoint> points;
  std::vector<DegenerateArc> arcs;
  int branch_roots = 0;   // roots on xi_phi = 0, excluded from the Morse test
  int seeded_cells = 0;
  std::vector<std::string> warnings;
};

/// A1: the fiber gradient of p1 stays away from zero on the energy shell.
inline bool check_A1(const ProfileFunction& profile, const Curve& curve, double E1,
                     double a1_tol = 1e-8) {
  if (!(E1 > 0.0)) return false;
  const Cylinder cyl{profile, curve, E1};
  constexpr int kN = 64;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kN; ++i) {
    const double tau = curve.tau_a + (curve.tau_b - curve.tau_a) * i / kN;
    const double a = profile.a(curve.t(tau));
    for (int j = 0; j < kN; ++j) {
      const PhasePoint z = cyl.chart(tau, 2.0 * std::numbers::pi * j / kN);
      const double g = 2.0 * std::hypot(z.xi_t, z.xi_phi / a);
      worst = std::min(worst, g);
    }
  }
  return worst >= a1_tol;
}

/// Tangent-inclusion test: dp1 and dp2 both annihilate the chart tangent plane.
inline bool tangent_inclusion_test(const ProfileFunction& profile, const Cylinder& cyl, double tau,
                                   double omega, double tol = 1e-9) {
  const PhasePoint z = cyl.chart(tau, omega);
  const Covector4 u = dp1(profile, z);
  const Covector4 v = dp2(profile, z);
  const Covector4 e_tau = cyl.chart_dtau(tau, omega);
  const Covector4 e_omega = cyl.chart_domega(tau, omega);
  auto pair = [](const Covector4& a, const Covector4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
  };
  return std::abs(pair(u, e_tau)) < tol && std::abs(pair(u, e_omega)) < tol &&
         std::abs(pair(v, e_tau)) < tol && std::abs(pair(v, e_omega)) < tol;
}

namespace detail {

inline double wrap_angle(double w) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  w = std::fmod(w, two_pi);
  if (w < 0) w += two_pi;
  return w;
}

inline double angle_distance(double a, double b) {
  const double d = std::abs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, 2.0 * std::numbers::pi - d);
}

struct NewtonResult {
  bool converged = false;
  double tau = 0.0;
  double omega = 0.0;
};

/// Newton on grad Psi = 0 with a truncated pseudo-inverse, so that flat
/// directions (degenerate arcs) are left alone instead of blowing up.
inline NewtonResult newton_critical(const Cylinder& cyl, double tau, double omega, double dtau,
                                    double domega, const GenericityOptions& opt) {
  const double slack = 1e-12 * std::max(1.0, std::abs(cyl.curve.tau_b - cyl.curve.tau_a));
  // once inside grad_tol, a few polishing steps are kept while they still help
  int polish = 0;
  NewtonResult best;
  double best_g = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= opt.newton_max_iter; ++it) {
    const auto g = psi_gradient(cyl, tau, omega);
    const double gn = std::hypot(g[0], g[1]);
    if (gn < opt.grad_tol || polish > 0) {
      if (!(gn < best_g)) return best;
      best = {true, tau, detail::wrap_angle(omega)};
      best_g = gn;
      if (++polish > 3 || gn == 0.0) return best;
    }
    if (it == opt.newton_max_iter) break;
    const Sym2 H = psi_hessian(cyl, tau, omega);
    // eigen-decomposition of the symmetric 2x2 Hessian
    const auto mu = H.eigenvalues();
    const double mu_max = std::max(std::abs(mu[0]), std::abs(mu[1]));
    if (mu_max == 0.0) break;
    double step_t = 0.0;
    double step_w = 0.0;
    for (int k = 0; k < 2; ++k) {
      if (std::abs(mu[k]) <= 1e-10 * mu_max) continue;
      // eigenvector for eigenvalue mu[k]: of the two null-space candidates take
      // the longer one, the other is dominated by cancellation when xy is tiny
      double vx = H.xy;
      double vy = mu[k] - H.xx;
      if (std::hypot(mu[k] - H.yy, H.xy) > std::hypot(vx, vy)) {
        vx = mu[k] - H.yy;
        vy = H.xy;
      }
      double nv = std::hypot(vx, vy);
      if (nv < 1e-300) {
        vx = (k == 0) == (H.xx <= H.yy) ? 1.0 : 0.0;
        vy = 1.0 - vx;
        nv = 1.0;
      }
      vx /= nv;
      vy /= nv;
      const double c = (vx * g[0] + vy * g[1]) / mu[k];
      step_t -= c * vx;
      step_w -= c * vy;
    }
    // at most two grid cells per iteration
    const double sc = std::max({1.0, std::abs(step_t) / (2 * dtau), std::abs(step_w) / (2 * domega)});
    tau += step_t / sc;
    omega += step_w / sc;
    if (tau < cyl.curve.tau_a - slack || tau > cyl.curve.tau_b + slack) {
      tau = std::clamp(tau, cyl.curve.tau_a, cyl.curve.tau_b);
    }
  }
  if (best.converged) return best;
  return {false, tau, omega};
}

}  // namespace detail

inline CriticalPoint make_critical_point(const Cylinder& cyl, double tau, double omega,
                                         const GenericityOptions& opt) {
  CriticalPoint cp;
  cp.tau = tau;
  cp.omega = omega;
  cp.psi_value = psi(cyl, tau, omega);
  cp.hessian = psi_hessian(cyl, tau, omega);
  cp.det = cp.hessian.det();
  const double s = std::sin(omega);
  cp.det_fiber_chart = cp.det / (cyl.E1 * s * s);
  const auto g = psi_gradient(cyl, tau, omega);
  cp.gradient_norm = std::hypot(g[0], g[1]);
  if (std::abs(cp.det) > opt.deg_tol) {
    const auto mu = cp.hessian.eigenvalues();
    cp.morse_index = (mu[0] < 0 ? 1 : 0) + (mu[1] < 0 ? 1 : 0);
  }
  const double t = cyl.curve.t(tau);
  cp.parallel_tangency = std::abs(cyl.curve.t.d1(tau)) < 1e-9;
  cp.over_equator = std::abs(cyl.profile.da(t)) < 1e-9;
  return cp;
}

/// Grid-seeded Newton search for critical points of Psi on the cylinder.
inline CriticalSearch find_critical_points(const Cylinder& cyl, const GenericityOptions& opt = {}) {
  const int nt = opt.grid_tau;
  const int nw = opt.grid_omega;
  const double ta = cyl.curve.tau_a;
  const double tb = cyl.curve.tau_b;
  const double dtau = (tb - ta) / nt;
  const double domega = 2.0 * std::numbers::pi / nw;

  std::vector<std::array<double, 2>> grad(static_cast<std::size_t>((nt + 1) * nw));
  auto at = [&](int i, int j) -> std::array<double, 2>& {
    return grad[static_cast<std::size_t>(i * nw + ((j % nw) + nw) % nw)];
  };
  double scale0 = 0.0;
  double scale1 = 0.0;
  for (int i = 0; i <= nt; ++i)
    for (int j = 0; j < nw; ++j) {
      at(i, j) = psi_gradient(cyl, ta + i * dtau, j * domega);
      scale0 = std::max(scale0, std::abs(at(i, j)[0]));
      scale1 = std::max(scale1, std::abs(at(i, j)[1]));
    }
  auto brackets = [&](int i, int j, int comp, double scale) {
    if (scale == 0.0) return true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj) {
        double v = at(i + di, j + dj)[comp];
        if (std::abs(v) <= 1e-12 * scale) v = 0.0;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    return lo <= 0.0 && hi >= 0.0;
  };

  struct Root {
    double tau;
    double omega;
    int row;
  };
  std::vector<Root> roots;
  CriticalSearch out;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nw; ++j) {
      if (!brackets(i, j, 0, scale0) || !brackets(i, j, 1, scale1)) continue;
      ++out.seeded_cells;
      const double tc = ta + (i + 0.5) * dtau;
      const double wc = (j + 0.5) * domega;
      auto res = detail::newton_critical(cyl, tc, wc, dtau, domega, opt);
      if (!res.converged) {
        // subdivide once
        for (int q = 0; q < 4 && !res.converged; ++q) {
          const double ts = ta + (i + 0.25 + 0.5 * (q / 2)) * dtau;
          const double ws = (j + 0.25 + 0.5 * (q % 2)) * domega;
          res = detail::newton_critical(cyl, ts, ws, 0.5 * dtau, 0.5 * domega, opt);
        }
        if (!res.converged) {
          out.warnings.push_back("newton did not converge from cell (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");
          continue;
        }
      }
      if (std::abs(std::sin(res.omega)) < opt.branch_tol) {
        ++out.branch_roots;
        continue;
      }
      roots.push_back({res.tau, res.omega, i});
    }

  // group roots sharing omega; long runs over consecutive rows are arcs
  std::vector<bool> used(roots.size(), false);
  std::vector<std::size_t> order(roots.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (roots[a].omega != roots[b].omega) return roots[a].omega < roots[b].omega;
    return roots[a].tau < roots[b].tau;
  });
  for (std::size_t a = 0; a < order.size(); ++a) {
    const Root& r0 = roots[order[a]];
    if (used[order[a]]) continue;
    std::vector<std::size_t> group;
    for (std::size_t b = 0; b < order.size(); ++b) {
      const Root& rb = roots[order[b]];
      if (!used[order[b]] && detail::angle_distance(rb.omega, r0.omega) < opt.dedup_tol)
        group.push_back(order[b]);
    }
    std::sort(group.begin(), group.end(),
              [&](std::size_t x, std::size_t y) { return roots[x].row < roots[y].row; });
    std::vector<int> rows;
    for (std::size_t g : group) rows.push_back(roots[g].row);
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::size_t s = 0;
    while (s < rows.size()) {
      std::size_t e = s;
      while (e + 1 < rows.size() && rows[e + 1] == rows[e] + 1) ++e;
      const int run = static_cast<int>(e - s + 1);
      if (run >= opt.arc_min_cells) {
        const double t0 = ta + rows[s] * dtau;
        const double t1 = ta + (rows[e] + 1) * dtau;
        // certify: gradient vanishes along the whole segment and Hessian is singular
        bool flat = true;
        constexpr int kProbe = 32;
        for (int k = 0; k <= kProbe && flat; ++k) {
          const double tau = t0 + (t1 - t0) * k / kProbe;
          const auto g = psi_gradient(cyl, tau, r0.omega);
          if (std::hypot(g[0], g[1]) >= opt.grad_tol) flat = false;
          if (std::abs(psi_hessian(cyl, tau, r0.omega).det()) > opt.deg_tol) flat = false;
        }
        if (flat) {
          DegenerateArc arc;
          arc.tau_begin = t0;
          arc.tau_end = t1;
          arc.omega = r0.omega;
          arc.cells = run;
          arc.description = "dPsi vanishes identically along omega = " + std::to_string(r0.omega) +
                            " for tau in [" + std::to_string(t0) + ", " + std::to_string(t1) + "]";
          out.arcs.push_back(arc);
          for (std::size_t g : group)
            if (roots[g].row >= rows[s] && roots[g].row <= rows[e]) used[g] = true;
        }
      }
      s = e + 1;
    }
  }

  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (used[k]) continue;
    const Root& r = roots[k];
    bool dup = false;
    for (const auto& p : out.points) {
      if (std::abs(p.tau - r.tau) < opt.dedup_tol && detail::angle_distance(p.omega, r.omega) < opt.dedup_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.points.push_back(make_critical_point(cyl, r.tau, r.omega, opt));
  }
  // deterministic order regardless of seeding schedule
  std::sort(out.points.begin(), out.points.end(), [](const auto& a, const auto& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    return a.omega < b.omega;
  });
  std::sort(out.arcs.begin(), out.arcs.end(), [](const auto& a, const auto& b) {
    if (a.omega != b.omega) return a.omega < b.omega;
    return a.tau_begin < b.tau_begin;
  });
  return out;
}

enum class Verdict { Generic, NonGenericSingularOrbit, NonGenericCaustic, NonGenericDegenerate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Generic: return "Generic";
    case Verdict::NonGenericSingularOrbit: return "NonGenericSingularOrbit";
    case Verdict::NonGenericCaustic: return "NonGenericCaustic";
    case Verdict::NonGenericDegenerate: return "NonGenericDegenerate";
  }
  return "NonGenericDegenerate";
}

inline bool is_generic(Verdict v) { return v == Verdict::Generic; }

struct CurveClassification {
  Verdict verdict = Verdict::NonGenericDegenerate;
  std::vector<CriticalPoint> critical_points;
  std::vector<DegenerateArc> arcs;
  std::optional<std::string> witness;
  bool a1_check = false;
  int branch_roots = 0;
  std::vector<SingularOrbit> singular_orbits;
  std::vector<std::string> warnings;
  GenericityOptions tolerances;
};

/// Raised when condition A1 fails and the Morse test is meaningless.
class ClassificationRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline CurveClassification classify_curve(const ProfileFunction& profile, const Curve& curve,
                                          double E1, const GenericityOptions& opt = {}) {
  CurveClassification out;
  out.tolerances = opt;
  out.a1_check = check_A1(profile, curve, E1, opt.a1_tol);
  if (!out.a1_check) {
    throw ClassificationRefused("condition A1 fails: the fiber gradient of p1 vanishes on the energy shell (E1 = " +
                                std::to_string(E1) + ")");
  }
  const Cylinder cyl{profile, curve, E1};
  CriticalSearch search = find_critical_points(cyl, opt);
  out.critical_points = search.points;
  out.arcs = search.arcs;
  out.branch_roots = search.branch_roots;
  out.warnings = search.warnings;
  out.singular_orbits = find_singular_orbits(profile, E1);

  const double L = profile.domain_length;
  if (!search.arcs.empty()) {
    Verdict best = Verdict::NonGenericDegenerate;
    std::string witness;
    for (const auto& arc : search.arcs) {
      double t_lo = std::numeric_limits<double>::infinity();
      double t_hi = -t_lo;
      double max_dt = 0.0;
      constexpr int kProbe = 64;
      for (int k = 0; k <= kProbe; ++k) {
        const double tau = arc.tau_begin + (arc.tau_end - arc.tau_begin) * k / kProbe;
        const double t = curve.t(tau);
        t_lo = std::min(t_lo, t);
        t_hi = std::max(t_hi, t);
        max_dt = std::max(max_dt, std::abs(curve.t.d1(tau)));
      }
      Verdict v = Verdict::NonGenericDegenerate;
      const bool fiber_on_orbit = std::abs(std::cos(arc.omega)) < 1e-6;  // xi_t = 0
      bool over_orbit = false;
      for (const auto& o : out.singular_orbits)
        if (std::max(std::abs(t_lo - o.t_star), std::abs(t_hi - o.t_star)) < 1e-9 * L) over_orbit = true;
      if (over_orbit && fiber_on_orbit) {
        v = Verdict::NonGenericSingularOrbit;
      } else if (max_dt < 1e-9) {
        v = Verdict::NonGenericCaustic;
      }
      auto rank = [](Verdict x) {
        return x == Verdict::NonGenericSingularOrbit ? 2 : x == Verdict::NonGenericCaustic ? 1 : 0;
      };
      if (witness.empty() || rank(v) > rank(best)) {
        best = v;
        witness = arc.description;
      }
    }
    out.verdict = best;
    out.witness = witness;
    return out;
  }
  for (const auto& cp : out.critical_points) {
    if (!cp.morse_index) {
      out.verdict = Verdict::NonGenericDegenerate;
      out.witness = "degenerate critical point at tau = " + std::to_string(cp.tau) +
                    ", omega = " + std::to_string(cp.omega);
      return out;
    }
  }
  out.verdict = Verdict::Generic;
  return out;
}

}  // namespace qcilab

#endif  // QCILAB_GENERICITY_HPP
