#ifndef QCILAB_SPECTRUM_HPP
#define QCILAB_SPECTRUM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qcilab/errors.hpp"
#include "qcilab/legendre.hpp"
#include "qcilab/ode.hpp"
#include "qcilab/quadrature.hpp"
#include "qcilab/surface.hpp"

namespace qcilab {

/// Angular number m (eigenvalue of D_phi) and radial node count n.
struct ModeIndex {
  int m = 0;
  int n = 0;
  int ell() const { return m + n; }
  auto operator<=>(const ModeIndex&) const = default;
};

/// Joint eigenfunction f(t) e^{i m phi} of -Laplacian and D_phi^2.
struct JointEigenfunction {
  ModeIndex index;
  double lambda_sq = 0.0;
  double hbar = std::numeric_limits<double>::infinity();
  std::array<double, 2> joint_values{1.0, 0.0};  // (hbar^2 lambda^2, (hbar m)^2)
  std::function<double(double)> radial;
  double domain_length = std::numbers::pi;
  double norm_cert = 0.0;
  double solver_residual = 0.0;
  std::optional<int> ell_equiv;  // sphere only

  double lambda() const { return std::sqrt(std::max(lambda_sq, 0.0)); }
  double f(double t) const { return radial(t); }
};

namespace detail {

inline void set_semiclassical(JointEigenfunction& e) {
  const double lam = e.lambda();
  if (lam > 0.0) {
    e.hbar = 1.0 / lam;
    const double hm = e.hbar * e.index.m;
    e.joint_values = {e.hbar * e.hbar * e.lambda_sq, hm * hm};
  } else {
    e.hbar = std::numeric_limits<double>::infinity();
    e.joint_values = {1.0, 0.0};
  }
}

}  // namespace detail

/// Spherical harmonic radial factor normalized_P_l^m(cos t)/sqrt(2 pi).
inline JointEigenfunction sphere_eigenfunction(int l, int m) {
  auto leg = std::make_shared<const NormalizedLegendre>(l, m);
  JointEigenfunction e;
  e.index = {m, l - m};
  e.lambda_sq = static_cast<double>(l) * (l + 1.0);
  e.ell_equiv = l;
  const double inv = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  e.radial = [leg, inv](double t) { return (*leg)(std::cos(t)) * inv; };
  e.domain_length = std::numbers::pi;
  // 2 pi int f^2 sin t dt = int P^2 dx, a polynomial of degree 2l: exact with l+1 nodes
  const GaussRule g = gauss_legendre(static_cast<std::size_t>(l) + 2);
  double s = 0.0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    const double v = (*leg)(g.nodes[k]);
    s += g.weights[k] * v * v;
  }
  e.norm_cert = s;
  e.solver_residual = 0.0;
  detail::set_semiclassical(e);
  return e;
}

struct SlOptions {
  double rtol = 1e-10;
  double atol = 1e-13;
  double bracket_rel_tol = 1e-10;
  int max_bisections = 200;
  int points_per_wavelength = 256;
  double residual_check_margin = 0.05;  // fraction of L excluded at each pole
  int residual_check_points = 400;
};

namespace detail {

/// Scaled Pruefer variables for (r f')' + (E r - m^2/r) f = 0, r = sqrt(a):
///   f = R sin(theta) / sqrt(sigma r),  r f' = R sqrt(sigma r) cos(theta).
/// State: theta, log R, M where M R^2 is the accumulated int f^2 r dt from the pole.
class PruferShooter {
 public:
  using State = ode::State<3>;

  PruferShooter(const ProfileFunction& p, int m, const SlOptions& opt)
      : profile_(p), m_(m), opt_(opt) {
    nu_ = m / std::sqrt(p.pole_coefficient);
  }

  double nu() const { return nu_; }

  void set_energy(double E) {
    E_ = E;
    sigma_ = std::sqrt(std::max(E, 1.0));
    const double L = profile_.domain_length;
    eps_ = std::min(1e-4 * L, 0.01 / std::sqrt(std::max(std::abs(E), 1.0)));
  }
  double energy() const { return E_; }
  double sigma() const { return sigma_; }
  double eps() const { return eps_; }

  /// d/dt of (theta, log R, M); `backward` selects the right-pole accumulation sign for M.
  void rhs(double t, const State& y, State& dy, bool backward) const {
    const double a = profile_.a(t);
    const double ra = profile_.da(t) / (2.0 * a);  // r'/r
    const double q = (E_ - m_ * m_ / a) / sigma_;
    const double s = std::sin(y[0]);
    const double c = std::cos(y[0]);
    dy[0] = sigma_ * c * c + q * s * s + ra * s * c;
    dy[1] = 0.5 * ((sigma_ - q) * 2.0 * s * c - ra * (c * c - s * s));
    dy[2] = (backward ? -1.0 : 1.0) * s * s / sigma_ - 2.0 * dy[1] * y[2];
  }

  /// Initial state at distance eps from the pole from the Frobenius/Bessel
  /// expansion f ~ s^nu (1 - E s^2 / (4 (nu + 1))).
  State pole_state(bool right) const {
    const double L = profile_.domain_length;
    const double t = right ? L - eps_ : eps_;
    const double r = std::sqrt(profile_.a(t));
    const double e = eps_;
    const double fs = 1.0 - E_ * e * e / (4.0 * (nu_ + 1.0));
    const double dfs = nu_ / e - E_ * e * (nu_ + 2.0) / (4.0 * (nu_ + 1.0));
    const double pf = (right ? -1.0 : 1.0) * r * dfs;
    const double S = sigma_ * r;
    const double theta = std::atan2(S * fs, pf);
    const double R2 = S * fs * fs + pf * pf / S;
    const double M0 = std::sqrt(profile_.pole_coefficient) * e * e * fs * fs / ((2.0 * nu_ + 2.0) * R2);
    return {theta, 0.5 * std::log(R2), M0};
  }

  template <class Observe>
  State shoot(bool right, std::span<const double> stops, Observe&& obs) const {
    const double L = profile_.domain_length;
    State y = pole_state(right);
    const double t0 = right ? L - eps_ : eps_;
    const double t1 = profile_.equator;
    ode::Options o;
    o.rtol = opt_.rtol;
    o.atol = opt_.atol;
    o.initial_step = 1e-3 * eps_;
    o.max_step = 0.25 / sigma_;
    auto f = [this, right](double t, const State& yy, State& dy) { rhs(t, yy, dy, right); };
    ode::integrate<3>(f, t0, t1, y, o, stops, obs);
    return y;
  }

  State shoot(bool right) const {
    return shoot(right, std::span<const double>{}, [](double, const State&, const State&) {});
  }

  /// theta_L(t0) - theta_R(t0) - n pi; increasing in E, zero at the n-th eigenvalue.
  double mismatch(int n) const {
    const State l = shoot(false);
    const State r = shoot(true);
    return l[0] - r[0] - n * std::numbers::pi;
  }

 private:
  const ProfileFunction& profile_;
  int m_;
  SlOptions opt_;
  double nu_ = 0.0;
  double E_ = 0.0;
  double sigma_ = 1.0;
  double eps_ = 1e-4;
};

/// Samples of (theta, log R) and their t-derivatives on one side of the matching point.
struct PruferTable {
  std::vector<double> t;
  std::vector<double> theta;
  std::vector<double> dtheta;
  std::vector<double> logr;
  std::vector<double> dlogr;
};

/// Cubic Hermite value and derivative on [x0, x1].
inline std::array<double, 2> hermite(double x, double x0, double x1, double y0, double d0, double y1,
                                     double d1) {
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  const double v = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
  const double dv = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0 + (-6 * s2 + 6 * s) * y1 +
                     (3 * s2 - 2 * s) * h * d1) /
                    h;
  return {v, dv};
}

/// Radial profile of a solved mode: Hermite interpolation of the Pruefer
/// variables on both sides plus the power-law tail inside the pole windows.
class PruferRadial {
 public:
  PruferRadial(const ProfileFunction& p, double nu, double E, double sigma, double eps, PruferTable left,
               PruferTable right, double amp_left, double amp_right)
      : a_(p.eval),
        da_(p.eval_d1),
        L_(p.domain_length),
        t0_(p.equator),
        nu_(nu),
        energy_(E),
        sigma_(sigma),
        eps_(eps),
        left_(std::move(left)),
        right_(std::move(right)),
        amp_left_(amp_left),
        amp_right_(amp_right) {}

  /// (f, r f', d(r f')/dt) at t; the last two only inside the tables.
  std::array<double, 3> eval_full(double t) const {
    if (t <= eps_ || t >= L_ - eps_) {
      const bool right = t >= L_ - eps_;
      const double s = right ? L_ - t : t;
      const double fe = right ? value_in(right_, amp_right_, L_ - eps_)[0]
                              : value_in(left_, amp_left_, eps_)[0];
      // leading Frobenius terms s^nu (1 - E s^2 / (4 (nu + 1)))
      const double c = energy_ / (4.0 * (nu_ + 1.0));
      const double shape = (1.0 - c * s * s) / (1.0 - c * eps_ * eps_);
      if (s <= 0.0) return {nu_ == 0.0 ? fe * shape : 0.0, 0.0, 0.0};
      return {fe * std::pow(s / eps_, nu_) * shape, 0.0, 0.0};
    }
    return t <= t0_ ? value_in(left_, amp_left_, t) : value_in(right_, amp_right_, t);
  }

  double operator()(double t) const { return eval_full(t)[0]; }

 private:
  std::array<double, 3> value_in(const PruferTable& tab, double amp, double t) const {
    const auto& ts = tab.t;
    const bool ascending = ts.front() < ts.back();
    std::size_t k;
    if (ascending) {
      auto it = std::upper_bound(ts.begin(), ts.end(), t);
      k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - ts.begin()));
    } else {
      auto it = std::upper_bound(ts.rbegin(), ts.rend(), t);
      k = ts.size() - static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - ts.rbegin()));
      k = std::max<std::size_t>(k, 1);
    }
    k = std::min(k, ts.size() - 1);
    const std::size_t j = k - 1;
    const auto th = hermite(t, ts[j], ts[k], tab.theta[j], tab.dtheta[j], tab.theta[k], tab.dtheta[k]);
    const auto lr = hermite(t, ts[j], ts[k], tab.logr[j], tab.dlogr[j], tab.logr[k], tab.dlogr[k]);
    const double a = a_(t);
    const double r = std::sqrt(a);
    const double S = sigma_ * r;
    const double amp_t = amp * std::exp(lr[0]);
    const double sn = std::sin(th[0]);
    const double cs = std::cos(th[0]);
    const double f = amp_t * sn / std::sqrt(S);
    const double pf = amp_t * std::sqrt(S) * cs;
    const double ra = da_(t) / (4.0 * a);  // (sqrt S)'/sqrt S
    const double dpf = pf * (lr[1] + ra) - amp_t * std::sqrt(S) * sn * th[1];
    return {f, pf, dpf};
  }

  std::function<double(double)> a_;
  std::function<double(double)> da_;
  double L_;
  double t0_;
  double nu_;
  double energy_;
  double sigma_;
  double eps_;
  PruferTable left_;
  PruferTable right_;
  double amp_left_;
  double amp_right_;
};

/// Output grid for one side: geometric near the pole, then uniform to t0.
inline std::vector<double> prufer_grid(double start, double end, double eps, double h_uniform) {
  std::vector<double> g;
  const double dir = end > start ? 1.0 : -1.0;
  const double L = std::abs(end - start);
  double s = eps;  // distance from pole
  const double pole = start - dir * eps;
  g.push_back(start);
  constexpr double q = 1.02;
  while (true) {
    const double next = s * q;
    if (next - s >= h_uniform) break;
    s = next;
    if (std::abs(s - eps) >= L) break;
    g.push_back(pole + dir * s);
  }
  double cur = g.back();
  const double rem = std::abs(end - cur);
  const int n = std::max(1, static_cast<int>(std::ceil(rem / h_uniform)));
  for (int i = 1; i < n; ++i) g.push_back(cur + dir * rem * i / n);
  g.push_back(end);
  return g;
}

}  // namespace detail

/// n-th eigenfunction with angular number m of -(1/r)(r f')' + (m^2/a) f = lambda^2 f,
/// r = sqrt(a), by double shooting from both poles and matching at the equator.
inline JointEigenfunction sl_solve(const ProfileFunction& profile, int m, int n,
                                   const SlOptions& opt_in = {}) {
  if (m < 0 || n < 0) throw DomainError("sl_solve: m and n must be nonnegative");
  SlOptions opt = opt_in;
  const double L = profile.domain_length;
  const double pi = std::numbers::pi;

  for (int attempt = 0; attempt < 2; ++attempt) {
    detail::PruferShooter sh(profile, m, opt);
    auto D = [&](double E) {
      sh.set_energy(E);
      return sh.mismatch(n);
    };

    double lo = -1.0;
    double dlo = D(lo);
    for (int k = 0; dlo >= 0.0; ++k) {
      if (k > 60) throw SolverError("sl_solve: could not bracket from below");
      lo = 2.0 * lo - 1.0;
      dlo = D(lo);
    }
    const double guess = (n + 1) * pi / L + m / std::sqrt(profile.a(profile.equator));
    double hi = std::max(1.0, guess * guess);
    double dhi = D(hi);
    for (int k = 0; dhi <= 0.0; ++k) {
      if (k > 60) throw SolverError("sl_solve: could not bracket from above");
      lo = hi;
      dlo = dhi;
      hi *= 2.0;
      dhi = D(hi);
    }

    // Illinois-modified regula falsi with bisection safeguard
    int side = 0;
    int it = 0;
    double flo = dlo;
    double fhi = dhi;
    while (hi - lo > opt.bracket_rel_tol * std::max(1.0, std::abs(0.5 * (lo + hi)))) {
      if (++it > opt.max_bisections) {
        throw SolverError("sl_solve: bracket failure for m=" + std::to_string(m) + ", n=" +
                          std::to_string(n) + " (bracket [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "])");
      }
      double x = hi - fhi * (hi - lo) / (fhi - flo);
      if (!(x > lo && x < hi) || it % 8 == 0) x = 0.5 * (lo + hi);
      const double tol = 0.25 * opt.bracket_rel_tol * std::max(1.0, std::abs(x));
      x = std::clamp(x, lo + tol, hi - tol);
      const double dx = D(x);
      if (dx == 0.0) {
        lo = hi = x;
        break;
      }
      if (dx < 0.0) {
        lo = x;
        flo = dx;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = x;
        fhi = dx;
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    const double E = 0.5 * (lo + hi);
    sh.set_energy(E);

    // dense pass on both sides
    const double h_uniform =
        std::min(2.0 * pi / (opt.points_per_wavelength * sh.sigma()), L / 1600.0);
    const auto grid_l = detail::prufer_grid(sh.eps(), profile.equator, sh.eps(), h_uniform);
    const auto grid_r = detail::prufer_grid(L - sh.eps(), profile.equator, sh.eps(), h_uniform);
    auto record = [](detail::PruferTable& tab) {
      return [&tab](double t, const ode::State<3>& y, const ode::State<3>& dy) {
        tab.t.push_back(t);
        tab.theta.push_back(y[0]);
        tab.dtheta.push_back(dy[0]);
        tab.logr.push_back(y[1]);
        tab.dlogr.push_back(dy[1]);
      };
    };
    detail::PruferTable tl;
    detail::PruferTable tr;
    const auto yl = sh.shoot(false, grid_l, record(tl));
    const auto yr = sh.shoot(true, grid_r, record(tr));
    // log R relative to the matching point
    for (auto& v : tl.logr) v -= yl[1];
    for (auto& v : tr.logr) v -= yr[1];
    const double amp = 1.0 / std::sqrt(2.0 * pi * (yl[2] + yr[2]));
    const double amp_r = (n % 2 == 0 ? 1.0 : -1.0) * amp;
    // keep f positive next to the left pole
    const double sign = std::sin(tl.theta.front()) >= 0.0 ? 1.0 : -1.0;
    auto radial = std::make_shared<detail::PruferRadial>(profile, sh.nu(), E, sh.sigma(), sh.eps(),
                                                         std::move(tl), std::move(tr), sign * amp,
                                                         sign * amp_r);

    JointEigenfunction e;
    e.index = {m, n};
    e.lambda_sq = E;
    e.domain_length = L;
    e.radial = [radial](double t) { return (*radial)(t); };
    if (profile.round_sphere) e.ell_equiv = m + n;
    detail::set_semiclassical(e);

    // node count on a fine sample
    int zeros = 0;
    {
      const int samples = std::max(4000, 40 * (n + 1));
      double prev = e.f(L * 0.5 / samples);
      for (int k = 1; k < samples; ++k) {
        const double v = e.f(L * (k + 0.5) / samples);
        if ((v > 0) != (prev > 0) && v != 0.0 && prev != 0.0) ++zeros;
        if (v != 0.0) prev = v;
      }
    }
    if (zeros != n) {
      if (attempt == 0) {
        opt.rtol *= 0.01;
        opt.points_per_wavelength *= 2;
        continue;
      }
      throw SolverError("sl_solve: node count " + std::to_string(zeros) + " != " + std::to_string(n) +
                        " for m=" + std::to_string(m));
    }

    // certificate: independent composite quadrature of 2 pi int f^2 sqrt(a) dt
    {
      const std::size_t panels = static_cast<std::size_t>(
          std::ceil(20.0 * (1.0 + e.lambda() * L) / 16.0)) + 64;
      const double s = composite_gauss(
          [&](double t) {
            const double v = e.f(t);
            return v * v * std::sqrt(profile.a(t));
          },
          0.0, L, panels);
      e.norm_cert = 2.0 * pi * s;
    }
    // ODE residual of the interpolated profile away from the poles
    {
      const double tl0 = opt.residual_check_margin * L;
      const double tr0 = (1.0 - opt.residual_check_margin) * L;
      double fmax = 0.0;
      double worst = 0.0;
      for (int k = 0; k <= opt.residual_check_points; ++k) {
        const double t = tl0 + (tr0 - tl0) * k / opt.residual_check_points;
        const auto v = radial->eval_full(t);
        const double a = profile.a(t);
        const double res = v[2] / std::sqrt(a) - (m * m / a) * v[0] + E * v[0];
        fmax = std::max(fmax, std::abs(v[0]));
        worst = std::max(worst, std::abs(res));
      }
      e.solver_residual = worst / (std::max(E, 1.0) * std::max(fmax, 1e-300));
    }
    return e;
  }
  throw SolverError("sl_solve: unreachable");
}

enum class FamilyKind { Zonal, HighestWeight, FixedRatio };

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Zonal: return "zonal";
    case FamilyKind::HighestWeight: return "highest_weight";
    case FamilyKind::FixedRatio: return "fixed_ratio";
  }
  return "zonal";
}

struct FamilySpec {
  FamilyKind kind = FamilyKind::Zonal;
  double ratio = 0.5;  // FixedRatio only, strictly inside (0, 1)
  double lambda_min = 100.0;
  double lambda_max = 3000.0;
  int count = 12;

  bool operator==(const FamilySpec&) const = default;
};

inline void validate_family(const FamilySpec& s) {
  if (s.kind == FamilyKind::FixedRatio && !(s.ratio > 0.0 && s.ratio < 1.0))
    throw InvalidInput("family: fixed-ratio c must lie strictly inside (0, 1)");
  if (!(s.lambda_min > 0.0) || !(s.lambda_max >= s.lambda_min))
    throw InvalidInput("family: need 0 < lambda_min <= lambda_max");
  if (s.count < 1) throw InvalidInput("family: count must be positive");
}

/// Mode indices along the geometric lambda ladder of a family.
inline std::vector<ModeIndex> family_modes(const ProfileFunction& profile, const FamilySpec& spec) {
  validate_family(spec);
  const double L = profile.domain_length;
  const double pi = std::numbers::pi;
  std::vector<ModeIndex> modes;
  int last_key = -1;
  for (int k = 0; k < spec.count; ++k) {
    const double lam = spec.count == 1 ? spec.lambda_min
                                       : spec.lambda_min * std::pow(spec.lambda_max / spec.lambda_min,
                                                                    static_cast<double>(k) / (spec.count - 1));
    // key: the index that increases along the ladder
    int key = 0;
    switch (spec.kind) {
      case FamilyKind::Zonal:
        key = profile.round_sphere ? static_cast<int>(std::lround(lam))
                                   : std::max(0, static_cast<int>(std::lround(lam * L / pi - 0.5)));
        break;
      case FamilyKind::HighestWeight:
        key = profile.round_sphere ? static_cast<int>(std::lround(lam))
                                   : static_cast<int>(std::lround(lam * std::sqrt(profile.a(profile.equator))));
        break;
      case FamilyKind::FixedRatio:
        key = static_cast<int>(std::lround(profile.round_sphere ? lam : lam * L / pi));
        break;
    }
    if (key <= last_key) key = last_key + 1;
    last_key = key;
    switch (spec.kind) {
      case FamilyKind::Zonal: modes.push_back({0, key}); break;
      case FamilyKind::HighestWeight: modes.push_back({key, 0}); break;
      case FamilyKind::FixedRatio: {
        const int mm = static_cast<int>(std::lround(spec.ratio * key));
        modes.push_back({mm, key - mm});
        break;
      }
    }
  }
  return modes;
}

/// Joint eigenfunction of a profile: closed form on the round sphere,
/// shooting solver otherwise.
inline JointEigenfunction solve_mode(const ProfileFunction& profile, ModeIndex mode,
                                     const SlOptions& opt = {}) {
  if (profile.round_sphere) return sphere_eigenfunction(mode.ell(), mode.m);
  return sl_solve(profile, mode.m, mode.n, opt);
}

inline std::vector<JointEigenfunction> enumerate_family(const ProfileFunction& profile,
                                                        const FamilySpec& spec,
                                                        const SlOptions& opt = {}) {
  std::vector<JointEigenfunction> out;
  for (const ModeIndex& mode : family_modes(profile, spec)) out.push_back(solve_mode(profile, mode, opt));
  return out;
}

}  // namespace qcilab

#endif  // QCILAB_SPECTRUM_HPP
