#ifndef QCILAB_ODE_HPP
#define QCILAB_ODE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "qcilab/errors.hpp"

namespace qcilab::ode {

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 1e-4;
  double max_step = 0.0;     // 0: unbounded
  long max_steps = 5'000'000;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
};

template <std::size_t N>
using State = std::array<double, N>;

/// Adaptive Dormand-Prince 5(4) integration from t0 to t1 (either direction).
/// The integrator lands exactly on every time in `stops` (ordered along the
/// direction of integration, all within [t0, t1]) and calls
/// `observe(t, y, dydt)` there.
template <std::size_t N, class Rhs, class Observe>
Stats integrate(Rhs&& rhs, double t0, double t1, State<N>& y, const Options& opt,
                std::span<const double> stops, Observe&& observe) {
  // Butcher tableau of Dormand & Prince (1980).
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Stats stats;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span_len = std::abs(t1 - t0);
  if (span_len == 0.0) return stats;
  double h = std::min(std::abs(opt.initial_step), span_len);
  const double hmax = opt.max_step > 0.0 ? opt.max_step : span_len;

  State<N> k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
  double t = t0;
  rhs(t, y, k1);
  std::size_t next_stop = 0;
  while (next_stop < stops.size() && dir * (stops[next_stop] - t) <= 0.0) {
    observe(t, y, k1);
    ++next_stop;
  }

  while (dir * (t1 - t) > 0.0) {
    if (stats.accepted + stats.rejected > opt.max_steps) {
      throw SolverError("ode::integrate: step budget exhausted");
    }
    double target = t1;
    if (next_stop < stops.size()) target = stops[next_stop];
    bool lands = false;
    double step = std::min(h, hmax);
    if (step >= std::abs(target - t)) {
      step = std::abs(target - t);
      lands = true;
    }
    const double hs = dir * step;

    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    rhs(t + c2 * hs, tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * hs, tmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * hs, tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * hs, tmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                            a65 * k5[i]);
    rhs(t + hs, tmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const double tnew = lands ? target : t + hs;
    rhs(tnew, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                              e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(ei) / sc);
    }

    if (err <= 1.0 || step < 1e-15 * std::max(1.0, std::abs(t))) {
      ++stats.accepted;
      t = tnew;
      y = ynew;
      k1 = k7;
      if (lands && next_stop < stops.size() && target == stops[next_stop]) {
        while (next_stop < stops.size() && dir * (stops[next_stop] - t) <= 0.0) {
          observe(t, y, k1);
          ++next_stop;
        }
      }
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      // a truncated landing step says nothing about the admissible size
      if (!lands || fac < 1.0) h = std::max(step, h) * fac;
      if (lands && fac >= 1.0) h = std::max(h, step);
    } else {
      ++stats.rejected;
      h = step * std::max(0.2, 0.9 * std::pow(err, -0.2));
    }
  }
  return stats;
}

template <std::size_t N, class Rhs>
Stats integrate(Rhs&& rhs, double t0, double t1, State<N>& y, const Options& opt) {
  return integrate<N>(std::forward<Rhs>(rhs), t0, t1, y, opt, std::span<const double>{},
                      [](double, const State<N>&, const State<N>&) {});
}

}  // namespace qcilab::ode

#endif  // QCILAB_ODE_HPP
