#ifndef QCILAB_LEGENDRE_HPP
#define QCILAB_LEGENDRE_HPP

#include <cmath>
#include <vector>

#include "qcilab/errors.hpp"

namespace qcilab {

/// Fully normalized associated Legendre function without the Condon-Shortley
/// phase: int_{-1}^{1} (P_l^m)^2 dx = 1. Evaluated by the three-term
/// recurrence ascending in l from the diagonal seed; the seed is carried in
/// log form and the recurrence rescaled, so large degrees neither overflow
/// nor lose the tiny (1-x^2)^{m/2} factor prematurely.
class NormalizedLegendre {
 public:
  NormalizedLegendre(int l, int m) : l_(l), m_(m) {
    if (m < 0 || m > l) throw DomainError("legendre_norm: requires 0 <= m <= l");
    log_seed_ = 0.5 * std::log(0.5);
    for (int k = 1; k <= m; ++k) log_seed_ += 0.5 * std::log((2.0 * k + 1.0) / (2.0 * k));
    coeff_a_.reserve(static_cast<std::size_t>(l - m));
    coeff_b_.reserve(static_cast<std::size_t>(l - m));
    for (int k = m + 2; k <= l; ++k) {
      const double kk = k;
      const double mm = m;
      const double km1 = kk - 1.0;
      coeff_a_.push_back(std::sqrt((4.0 * kk * kk - 1.0) / (kk * kk - mm * mm)));
      coeff_b_.push_back(std::sqrt((km1 * km1 - mm * mm) / (4.0 * km1 * km1 - 1.0)));
    }
  }

  int degree() const { return l_; }
  int order() const { return m_; }

  double operator()(double x) const {
    if (!(x >= -1.0 - 1e-14 && x <= 1.0 + 1e-14)) throw DomainError("legendre_norm: |x| must be <= 1");
    x = std::fmax(-1.0, std::fmin(1.0, x));
    const double s2 = (1.0 - x) * (1.0 + x);
    if (m_ > 0 && s2 == 0.0) return 0.0;
    double log_scale = log_seed_ + (m_ > 0 ? 0.5 * m_ * std::log(s2) : 0.0);
    if (l_ == m_) return std::exp(log_scale);
    double prev = 1.0;
    double cur = std::sqrt(2.0 * m_ + 3.0) * x;
    constexpr double kBig = 1e250;
    constexpr double kLogBig = 575.6462732485114;  // ln(1e250)
    const std::size_t n = coeff_a_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double next = coeff_a_[i] * (x * cur - coeff_b_[i] * prev);
      prev = cur;
      cur = next;
      if (std::abs(cur) > kBig) {
        cur /= kBig;
        prev /= kBig;
        log_scale += kLogBig;
      }
    }
    if (cur == 0.0) return 0.0;
    const double mag = log_scale + std::log(std::abs(cur));
    if (mag < -745.0) return 0.0;
    return std::copysign(std::exp(mag), cur);
  }

 private:
  int l_;
  int m_;
  double log_seed_ = 0.0;
  std::vector<double> coeff_a_;
  std::vector<double> coeff_b_;
};

inline double legendre_norm(int l, int m, double x) { return NormalizedLegendre(l, m)(x); }

}  // namespace qcilab

#endif  // QCILAB_LEGENDRE_HPP
