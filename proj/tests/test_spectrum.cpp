#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcilab/quadrature.hpp"
#include "qcilab/spectrum.hpp"

using namespace qcilab;
constexpr double kPi = std::numbers::pi;

TEST(Legendre, LowDegreeClosedForms) {
  for (double x : {-1.0, -0.3, 0.0, 0.6, 1.0}) EXPECT_NEAR(legendre_norm(0, 0, x), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(legendre_norm(1, 0, 1.0), std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(legendre_norm(2, 0, 0.0), -0.5 * std::sqrt(2.5), 1e-15);
  // no Condon-Shortley phase: P_1^1 = sqrt(3)/2 * sqrt(1 - x^2)
  EXPECT_NEAR(legendre_norm(1, 1, 0.6), std::sqrt(3.0) / 2 * 0.8, 1e-15);
}

TEST(Legendre, ExtendedPrecisionReferences) {
  // 256-bit reference values
  EXPECT_NEAR(legendre_norm(200, 0, 0.3) / -0.1381950263985683761837208 - 1, 0.0, 1e-10);
  EXPECT_NEAR(legendre_norm(7, 3, 0.4) / -0.8324722085771992905178409 - 1, 0.0, 1e-13);
  EXPECT_NEAR(legendre_norm(50, 50, 0.6) / 2.861358080401472222787019e-5 - 1, 0.0, 1e-12);
}

TEST(Legendre, DomainErrors) {
  EXPECT_THROW(legendre_norm(2, 3, 0.0), DomainError);
  EXPECT_THROW(legendre_norm(2, -1, 0.0), DomainError);
  EXPECT_THROW(legendre_norm(2, 1, 1.5), DomainError);
}

TEST(Legendre, NormalizedByGaussQuadrature) {
  for (int l : {3, 17, 60}) {
    const auto g = gauss_legendre(static_cast<std::size_t>(l) + 2);
    for (int m : {0, l / 2, l}) {
      double s = 0;
      for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * std::pow(legendre_norm(l, m, g.nodes[k]), 2);
      EXPECT_NEAR(s, 1.0, 1e-12) << l << " " << m;
    }
  }
}

TEST(Legendre, FiniteAtHugeDegree) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const NormalizedLegendre z(100000, 0), mid(100000, 50000), top(100000, 100000);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_TRUE(std::isfinite(z(x)));
    EXPECT_TRUE(std::isfinite(mid(x)));
    EXPECT_TRUE(std::isfinite(top(x)));
  }
  // pointwise bound |P| <= sqrt((2l+1)/2) at the poles of a zonal function
  EXPECT_NEAR(z(1.0), std::sqrt(100000.5), 1e-6 * std::sqrt(100000.5));
}

TEST(SphereEigenfunction, Examples) {
  const auto e = sphere_eigenfunction(2, 0);
  EXPECT_NEAR(e.f(kPi / 2), -std::sqrt(2.5) / (2 * std::sqrt(2 * kPi)), 1e-15);
  EXPECT_NEAR(e.f(kPi / 2), -0.3154, 1e-4);
  EXPECT_DOUBLE_EQ(e.lambda_sq, 6.0);
  EXPECT_NEAR(sphere_eigenfunction(10, 0).norm_cert, 1.0, 1e-10);
  const auto h = sphere_eigenfunction(5, 5);
  EXPECT_EQ(h.index.n, 0);
  for (int k = 1; k < 100; ++k) EXPECT_GT(h.f(kPi * k / 100), 0.0);
}

TEST(SphereEigenfunction, SemiclassicalBookkeeping) {
  for (int l : {1, 10, 100}) {
    const auto e = sphere_eigenfunction(l, l / 2);
    EXPECT_NEAR(e.hbar, 1.0 / std::sqrt(l * (l + 1.0)), 1e-15);
    EXPECT_NEAR(e.joint_values[0], 1.0, 1e-14);
    EXPECT_NEAR(e.joint_values[1], std::pow(e.hbar * (l / 2), 2), 1e-15);
  }
}

TEST(SlSolve, ConstantMode) {
  const auto e = sl_solve(make_sphere_profile(), 0, 0);
  EXPECT_NEAR(e.lambda_sq, 0.0, 1e-8);
  EXPECT_NEAR(e.f(1.0), 1.0 / std::sqrt(4 * kPi), 1e-8);
  EXPECT_NEAR(e.norm_cert, 1.0, 1e-8);
}

TEST(SlSolve, SphereOracleThreeFour) {
  const auto e = sl_solve(make_sphere_profile(), 3, 4);
  EXPECT_NEAR(e.lambda_sq / 56.0, 1.0, 1e-6);
  double sup = 0;
  for (int k = 0; k <= 4000; ++k) {
    const double t = kPi * k / 4000;
    sup = std::max(sup, std::abs(e.f(t) - legendre_norm(7, 3, std::cos(t)) / std::sqrt(2 * kPi)));
  }
  EXPECT_LT(sup, 1e-5);
  EXPECT_NEAR(e.norm_cert, 1.0, 1e-8);
  EXPECT_LT(e.solver_residual, 1e-6);
  ASSERT_TRUE(e.ell_equiv.has_value());
  EXPECT_EQ(*e.ell_equiv, 7);
}

TEST(SlSolve, QuarticModesSatisfyInvariants) {
  const auto q = make_quartic_profile(2.0);
  for (int m : {0, 2}) {
    double prev = -1.0;
    for (int n = 0; n < 4; ++n) {
      const auto e = sl_solve(q, m, n);
      EXPECT_LT(e.solver_residual, 1e-6);
      EXPECT_NEAR(e.norm_cert, 1.0, 1e-8);
      EXPECT_GT(e.lambda_sq, prev);
      prev = e.lambda_sq;
      EXPECT_FALSE(e.ell_equiv.has_value());
      EXPECT_NEAR(e.joint_values[0], 1.0, 1e-14);
    }
  }
}

TEST(SlSolve, NodeCountMatchesIndex) {
  const auto q = make_quartic_profile(kPi);
  for (int n = 0; n < 6; ++n) {
    const auto e = sl_solve(q, 1, n);
    int changes = 0;
    double prev = e.f(0.001);
    for (int k = 1; k < 5000; ++k) {
      const double v = e.f(kPi * (k + 0.5) / 5000);
      if (v * prev < 0) ++changes;
      prev = v;
    }
    EXPECT_EQ(changes, n);
  }
}

TEST(SlSolve, OrthogonalForFixedM) {
  const auto q = make_quartic_profile(2.0);
  std::vector<JointEigenfunction> es;
  for (int n = 0; n < 4; ++n) es.push_back(sl_solve(q, 1, n));
  for (std::size_t i = 0; i < es.size(); ++i)
    for (std::size_t j = i + 1; j < es.size(); ++j) {
      const double ip = 2 * kPi * composite_gauss([&](double t) { return es[i].f(t) * es[j].f(t) * std::sqrt(q.a(t)); },
                                                  0.0, 2.0, 400);
      EXPECT_LT(std::abs(ip), 1e-6) << i << " " << j;
    }
}

TEST(SlSolve, RejectsNegativeIndices) {
  EXPECT_THROW(sl_solve(make_sphere_profile(), -1, 0), DomainError);
}

TEST(Family, ZonalLadder) {
  FamilySpec f;
  f.kind = FamilyKind::Zonal;
  f.lambda_min = 10;
  f.lambda_max = 100;
  f.count = 8;
  const auto modes = family_modes(make_sphere_profile(), f);
  const std::vector<int> expect = {10, 14, 19, 27, 37, 52, 72, 100};
  ASSERT_EQ(modes.size(), 8u);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    EXPECT_EQ(modes[i].m, 0);
    EXPECT_EQ(modes[i].ell(), expect[i]);
  }
}

TEST(Family, HighestWeightLadder) {
  FamilySpec f;
  f.kind = FamilyKind::HighestWeight;
  f.lambda_min = 10;
  f.lambda_max = 40;
  f.count = 3;
  const auto es = enumerate_family(make_sphere_profile(), f);
  ASSERT_EQ(es.size(), 3u);
  const int ls[] = {10, 20, 40};
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(es[i].index.m, ls[i]);
    EXPECT_EQ(es[i].index.n, 0);
  }
}

TEST(Family, FixedRatioJointValue) {
  FamilySpec f;
  f.kind = FamilyKind::FixedRatio;
  f.ratio = 0.5;
  f.lambda_min = 100;
  f.lambda_max = 100;
  f.count = 1;
  const auto es = enumerate_family(make_sphere_profile(), f);
  ASSERT_EQ(es.size(), 1u);
  EXPECT_EQ(es[0].index.m, 50);
  EXPECT_NEAR(es[0].joint_values[1], 2500.0 / 10100.0, 1e-14);
  f.lambda_min = 1000;
  f.lambda_max = 1000;
  EXPECT_NEAR(enumerate_family(make_sphere_profile(), f)[0].joint_values[1], 0.25, 1e-3);
}

TEST(Family, InvalidSpecs) {
  FamilySpec f;
  f.kind = FamilyKind::FixedRatio;
  f.ratio = 1.0;
  EXPECT_THROW(family_modes(make_sphere_profile(), f), InvalidInput);
  f.ratio = 0.5;
  f.lambda_min = 10;
  f.lambda_max = 5;
  EXPECT_THROW(family_modes(make_sphere_profile(), f), InvalidInput);
}

TEST(Family, QuarticZonalStrictlyIncreasing) {
  FamilySpec f;
  f.kind = FamilyKind::Zonal;
  f.lambda_min = 5;
  f.lambda_max = 20;
  f.count = 6;
  const auto es = enumerate_family(make_quartic_profile(2.0), f);
  for (std::size_t i = 1; i < es.size(); ++i) EXPECT_GT(es[i].lambda_sq, es[i - 1].lambda_sq);
  for (const auto& e : es) EXPECT_EQ(e.index.m, 0);
}
