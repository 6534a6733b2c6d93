#ifndef QCILAB_ASYMPTOTICS_HPP
#define QCILAB_ASYMPTOTICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qcilab/errors.hpp"
#include "qcilab/genericity.hpp"
#include "qcilab/momentmap.hpp"
#include "qcilab/restriction.hpp"

namespace qcilab {

enum class GrowthModel { Constant, Log, Power };

inline const char* to_string(GrowthModel m) {
  switch (m) {
    case GrowthModel::Constant: return "Constant";
    case GrowthModel::Log: return "Log";
    case GrowthModel::Power: return "Power";
  }
  return "Constant";
}

/// One candidate law. Coefficients: Constant {c}, Log {c0, c1}, Power {c, alpha}.
struct ModelFit {
  GrowthModel model = GrowthModel::Constant;
  std::vector<double> coefficients;
  double residual_rms = 0.0;
  bool eligible = true;  // growth models must actually grow
};

struct GrowthFit {
  std::array<ModelFit, 3> models;
  GrowthModel best = GrowthModel::Constant;
  double dominance = 0.0;  // 1 - rms(best) / rms(strongest simpler rival), 0 for Constant
  double alpha = 0.0;
  double alpha_stderr = 0.0;
  std::array<double, 2> alpha_ci{0.0, 0.0};
  std::optional<double> lower_bound_cert;
  std::size_t sample_count = 0;

  const ModelFit& fit(GrowthModel m) const { return models[static_cast<int>(m)]; }
};

struct FitOptions {
  double dominance_margin = 0.10;
  int bootstrap_resamples = 200;
  std::uint64_t seed = 0;
  std::size_t min_samples = 6;
  double weight_floor = 1e-9;
};

namespace detail {

/// Weighted least squares y ~ X beta for one or two columns (1 and optionally x).
inline std::vector<double> wls(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& w, bool with_slope) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i];
    sy += w[i] * y[i];
    if (with_slope) {
      sx += w[i] * x[i];
      sxx += w[i] * x[i] * x[i];
      sxy += w[i] * x[i] * y[i];
    }
  }
  if (!with_slope) return {sy / sw};
  // centered form for conditioning
  const double xm = sx / sw;
  const double ym = sy / sw;
  const double vxx = sxx - sw * xm * xm;
  if (!(vxx > 0.0)) throw InvalidInput("fit_growth: abscissae are degenerate");
  const double slope = (sxy - sw * xm * ym) / vxx;
  return {ym - slope * xm, slope};
}

/// Weighted residual standard error sqrt(sum w r^2 / sum w * n / (n - p)).
inline double residual_rms(const std::vector<double>& r, const std::vector<double>& w, std::size_t p) {
  double sw = 0, s = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    sw += w[i];
    s += w[i] * r[i] * r[i];
  }
  const double n = static_cast<double>(r.size());
  return std::sqrt(s / sw * n / std::max(n - static_cast<double>(p), 1.0));
}

inline double power_alpha(const std::vector<double>& lx, const std::vector<double>& ly,
                          const std::vector<double>& w) {
  return wls(lx, ly, w, true)[1];
}

}  // namespace detail

inline void validate_series(const GrowthSeries& s, std::size_t min_samples) {
  if (s.samples.size() < min_samples)
    throw InvalidInput("fit_growth: need at least " + std::to_string(min_samples) + " samples, got " +
                       std::to_string(s.samples.size()));
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    if (!(s.samples[i].lambda > 0.0)) throw InvalidInput("fit_growth: lambdas must be positive");
    if (i > 0 && !(s.samples[i].lambda > s.samples[i - 1].lambda))
      throw InvalidInput("fit_growth: lambdas must be strictly increasing");
  }
}

/// Fit Constant, Log and Power laws and select one: a more complex eligible
/// model replaces the current choice only if it lowers the residual by the
/// dominance margin.
inline GrowthFit fit_growth(const GrowthSeries& series, const FitOptions& opt = {}) {
  validate_series(series, opt.min_samples);
  const std::size_t n = series.samples.size();
  std::vector<double> lam(n), v(n), w(n), ll(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = series.samples[i];
    lam[i] = s.lambda;
    v[i] = s.value;
    w[i] = 1.0 / std::max(s.quad_error, opt.weight_floor);
    ll[i] = std::log(s.lambda);
  }

  GrowthFit out;
  out.sample_count = n;
  std::vector<double> r(n);

  // Constant
  {
    ModelFit& f = out.models[0];
    f.model = GrowthModel::Constant;
    f.coefficients = detail::wls(ll, v, w, false);
    for (std::size_t i = 0; i < n; ++i) r[i] = v[i] - f.coefficients[0];
    f.residual_rms = detail::residual_rms(r, w, 1);
  }
  // Log
  {
    ModelFit& f = out.models[1];
    f.model = GrowthModel::Log;
    f.coefficients = detail::wls(ll, v, w, true);
    for (std::size_t i = 0; i < n; ++i) r[i] = v[i] - (f.coefficients[0] + f.coefficients[1] * ll[i]);
    f.residual_rms = detail::residual_rms(r, w, 2);
    f.eligible = f.coefficients[1] > 0.0;
  }
  // Power, fitted in log-log space; residual measured on the values
  std::vector<double> lv(n);
  bool positive = true;
  for (std::size_t i = 0; i < n; ++i) {
    positive = positive && v[i] > 0.0;
    lv[i] = v[i] > 0.0 ? std::log(v[i]) : 0.0;
  }
  {
    ModelFit& f = out.models[2];
    f.model = GrowthModel::Power;
    if (positive) {
      const auto b = detail::wls(ll, lv, w, true);
      f.coefficients = {std::exp(b[0]), b[1]};
      for (std::size_t i = 0; i < n; ++i) r[i] = v[i] - f.coefficients[0] * std::pow(lam[i], b[1]);
      f.residual_rms = detail::residual_rms(r, w, 2);
      f.eligible = b[1] > 0.0;
    } else {
      f.coefficients = {0.0, 0.0};
      f.residual_rms = std::numeric_limits<double>::infinity();
      f.eligible = false;
    }
  }

  // selection with dominance margin, simplest first
  std::size_t best = 0;
  double rival = out.models[0].residual_rms;
  for (std::size_t k = 1; k < 3; ++k) {
    const ModelFit& f = out.models[k];
    if (!f.eligible) continue;
    if (f.residual_rms < (1.0 - opt.dominance_margin) * out.models[best].residual_rms) {
      rival = out.models[best].residual_rms;
      best = k;
    }
  }
  out.best = out.models[best].model;
  out.dominance = best == 0 ? 0.0 : (rival > 0.0 ? 1.0 - out.models[best].residual_rms / rival : 1.0);

  out.alpha = out.models[2].coefficients[1];
  if (positive) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> bx(n), by(n), bw(n);
    std::vector<double> alphas;
    alphas.reserve(static_cast<std::size_t>(opt.bootstrap_resamples));
    for (int b = 0; b < opt.bootstrap_resamples; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = pick(rng);
        bx[i] = ll[j];
        by[i] = lv[j];
        bw[i] = w[j];
      }
      const auto [mn, mx] = std::minmax_element(bx.begin(), bx.end());
      if (*mx - *mn <= 0.0) continue;  // all draws at one lambda: slope undefined
      alphas.push_back(detail::power_alpha(bx, by, bw));
    }
    if (alphas.size() >= 2) {
      const double mean = std::accumulate(alphas.begin(), alphas.end(), 0.0) / alphas.size();
      double ss = 0.0;
      for (double a : alphas) ss += (a - mean) * (a - mean);
      out.alpha_stderr = std::sqrt(ss / (alphas.size() - 1));
    }
  }
  out.alpha_ci = {out.alpha - 1.96 * out.alpha_stderr, out.alpha + 1.96 * out.alpha_stderr};
  return out;
}

enum class SaturationVerdict { Saturated, NotSaturated };

inline const char* to_string(SaturationVerdict v) {
  return v == SaturationVerdict::Saturated ? "Saturated" : "NotSaturated";
}

struct SaturationResult {
  SaturationVerdict verdict = SaturationVerdict::NotSaturated;
  Stability stability = Stability::Stable;
  double alpha = 0.0;
  double c_gamma = 0.0;          // min over the top half of value / lambda^{1/2}
  double unstable_slope = 0.0;   // log-log slope of value log(lambda) / lambda^{1/2}, top half
  std::size_t window_start = 0;  // first sample index of the top half
};

struct SaturationOptions {
  double alpha_lo = 0.45;
  double alpha_hi = 0.55;
  double unstable_slope_floor = -0.05;
};

/// lambda^{1/2} saturation (stable orbit) or lambda^{1/2}/log(lambda) (unstable orbit).
inline SaturationResult saturation_check(const GrowthSeries& series, Stability stability,
                                         const FitOptions& fopt = {},
                                         const SaturationOptions& opt = {}) {
  const GrowthFit fit = fit_growth(series, fopt);
  const auto& s = series.samples;
  const std::size_t n = s.size();
  SaturationResult out;
  out.stability = stability;
  out.alpha = fit.alpha;
  out.window_start = n / 2;
  double cmin = std::numeric_limits<double>::infinity();
  double gmin = std::numeric_limits<double>::infinity();
  std::vector<double> lx, ly, w;
  for (std::size_t i = out.window_start; i < n; ++i) {
    const double sq = std::sqrt(s[i].lambda);
    cmin = std::min(cmin, s[i].value / sq);
    const double g = s[i].value * std::log(s[i].lambda) / sq;
    gmin = std::min(gmin, g);
    if (g > 0.0) {
      lx.push_back(std::log(s[i].lambda));
      ly.push_back(std::log(g));
      w.push_back(1.0);
    }
  }
  out.c_gamma = cmin;
  if (stability == Stability::Stable) {
    const bool power_ok = fit.models[2].coefficients[0] > 0.0;
    out.verdict = power_ok && fit.alpha >= opt.alpha_lo && fit.alpha <= opt.alpha_hi
                      ? SaturationVerdict::Saturated
                      : SaturationVerdict::NotSaturated;
  } else {
    if (lx.size() >= 2 && gmin > 0.0) {
      const double lo = *std::min_element(lx.begin(), lx.end());
      const double hi = *std::max_element(lx.begin(), lx.end());
      out.unstable_slope = hi > lo ? detail::wls(lx, ly, w, true)[1] : 0.0;
      out.verdict = out.unstable_slope >= opt.unstable_slope_floor ? SaturationVerdict::Saturated
                                                                   : SaturationVerdict::NotSaturated;
    }
  }
  return out;
}

enum class Consistency { Consistent, Inconsistent, NotAssessed };

inline const char* to_string(Consistency c) {
  switch (c) {
    case Consistency::Consistent: return "Consistent";
    case Consistency::Inconsistent: return "Inconsistent";
    case Consistency::NotAssessed: return "NotAssessed";
  }
  return "NotAssessed";
}

struct ConsistencyReport {
  Consistency status = Consistency::NotAssessed;
  Verdict classification = Verdict::Generic;
  GrowthModel observed = GrowthModel::Constant;
  double alpha = 0.0;
  std::string expected;
  std::string evidence;
};

/// Cross-check a genericity verdict against the observed growth law.
/// `concentrating` marks a family expected to saturate on a singular orbit
/// (highest weight on the equator); other families there only must not
/// exceed the saturation exponent.
inline ConsistencyReport theorem_verdict(Verdict classification, const GrowthFit& fit,
                                         bool concentrating = true,
                                         const SaturationOptions& sat = {}) {
  ConsistencyReport rep;
  rep.classification = classification;
  rep.observed = fit.best;
  rep.alpha = fit.alpha;
  const std::string seen = std::string("best=") + to_string(fit.best) + ", alpha=" +
                           std::to_string(fit.alpha) + ", classification=" + to_string(classification);
  switch (classification) {
    case Verdict::Generic: {
      rep.expected = "Constant or Log growth";
      const bool ok = fit.best == GrowthModel::Constant || fit.best == GrowthModel::Log;
      rep.status = ok ? Consistency::Consistent : Consistency::Inconsistent;
      break;
    }
    case Verdict::NonGenericSingularOrbit: {
      if (concentrating) {
        rep.expected = "Power growth with alpha in [" + std::to_string(sat.alpha_lo) + ", " +
                       std::to_string(sat.alpha_hi) + "]";
        const bool ok = fit.best == GrowthModel::Power && fit.alpha >= sat.alpha_lo &&
                        fit.alpha <= sat.alpha_hi;
        rep.status = ok ? Consistency::Consistent : Consistency::Inconsistent;
      } else {
        rep.expected = "no growth beyond alpha " + std::to_string(sat.alpha_hi);
        const bool bad = fit.best == GrowthModel::Power && fit.alpha > sat.alpha_hi;
        rep.status = bad ? Consistency::Inconsistent : Consistency::Consistent;
      }
      break;
    }
    case Verdict::NonGenericCaustic:
    case Verdict::NonGenericDegenerate:
      rep.expected = "no growth law asserted";
      rep.status = Consistency::NotAssessed;
      break;
  }
  rep.evidence = seen;
  return rep;
}

}  // namespace qcilab

#endif  // QCILAB_ASYMPTOTICS_HPP
