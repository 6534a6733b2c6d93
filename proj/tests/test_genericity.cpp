#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "qcilab/genericity.hpp"

using namespace qcilab;
constexpr double kPi = std::numbers::pi;

namespace {

Curve wavy_equator_graph(const ProfileFunction& p, double amp, double tau_a, double tau_b) {
  return make_equator_graph(p, tau_a, tau_b, ScalarFunction::series({p.equator}, {}, {amp}));
}

const CriticalPoint* find_point(const CurveClassification& c, double tau, double omega, double tol = 1e-7) {
  for (const auto& cp : c.critical_points)
    if (std::abs(cp.tau - tau) < tol && std::abs(cp.omega - omega) < tol) return &cp;
  return nullptr;
}

}  // namespace

TEST(Psi, Examples) {
  const auto s = make_sphere_profile();
  const Cylinder mer{s, make_meridian(s, 0.0, 0.2, kPi - 0.2), 1.0};
  EXPECT_NEAR(psi(mer, kPi / 2, kPi / 2), 1.0, 1e-15);
  EXPECT_EQ(psi(mer, 1.3, 0.0), 0.0);
  const Cylinder eq{s, make_equator(s, 0.0, 2 * kPi), 1.0};
  for (double tau : {0.0, 2.0, 5.0}) EXPECT_NEAR(psi(eq, tau, kPi / 4), 0.5, 1e-15);
}

TEST(Cylinder, EnergyShellInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto q = make_quartic_profile(2.0);
  const Cylinder cyl{q, wavy_equator_graph(q, 0.3, 0.0, 6.0), 2.5};
  for (int i = 0; i < 500; ++i) {
    const auto z = cyl.chart(6.0 * u(rng), 2 * kPi * u(rng));
    EXPECT_NEAR(eval_moment_map(q, z).p1, 2.5, 1e-12);
  }
}

TEST(Psi, ChartAgreesWithClosedForm) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto s = make_sphere_profile();
  const auto q = make_quartic_profile(1.7);
  const std::vector<Cylinder> cyls = {
      {s, make_meridian_graph(s, 0.3, 2.8, ScalarFunction::series({0.1, 0.2}, {0.05}, {})), 1.0},
      {s, wavy_equator_graph(s, 0.4, -3.0, 3.0), 0.7},
      {q, make_meridian(q, 0.0, 0.1, 1.6), 3.0},
      {q, wavy_equator_graph(q, 0.2, 0.0, 5.0), 1.0}};
  for (const auto& c : cyls)
    for (int i = 0; i < 200; ++i) {
      const double tau = c.curve.tau_a + (c.curve.tau_b - c.curve.tau_a) * u(rng);
      const double w = 2 * kPi * u(rng);
      const auto cf = psi_closed_form(c, tau, w);
      ASSERT_TRUE(cf.has_value());
      EXPECT_NEAR(psi(c, tau, w), *cf, 1e-12);
    }
  const Cylinder free{s, make_curve(s, "f", 0.0, 1.0, ScalarFunction::affine(1.0, 0.5), ScalarFunction::affine(0, 1)),
                      1.0};
  EXPECT_FALSE(psi_closed_form(free, 0.5, 0.5).has_value());
}

TEST(Psi, ScalesLinearlyInEnergy) {
  const auto q = make_quartic_profile(2.0);
  const Curve c = wavy_equator_graph(q, 0.3, -2.0, 2.5);
  for (double E1 : {0.5, 1.0, 4.0}) {
    const Cylinder a{q, c, 1.0};
    const Cylinder b{q, c, E1};
    EXPECT_NEAR(psi(b, 0.7, 1.1), E1 * psi(a, 0.7, 1.1), 1e-14);
  }
}

TEST(A1, Examples) {
  const auto s = make_sphere_profile();
  const auto q = make_quartic_profile(2.0);
  EXPECT_TRUE(check_A1(s, make_meridian(s, 0, 0.2, 3.0), 1.0));
  EXPECT_TRUE(check_A1(s, make_equator(s, 0, 1), 1.0));
  EXPECT_FALSE(check_A1(s, make_meridian(s, 0, 0.2, 3.0), 0.0));
  EXPECT_TRUE(check_A1(q, make_meridian(q, 0, 0.2, 1.8), 2.0));
}

TEST(Classify, MeridianIsGenericWithDeterminantFour) {
  const auto s = make_sphere_profile();
  const auto t0 = std::chrono::steady_clock::now();
  const auto cl = classify_curve(s, make_meridian(s, 0.0, 0.2, kPi - 0.2), 1.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
  EXPECT_EQ(cl.verdict, Verdict::Generic);
  EXPECT_TRUE(cl.a1_check);
  ASSERT_EQ(cl.critical_points.size(), 2u);
  for (double w : {kPi / 2, 3 * kPi / 2}) {
    const auto* cp = find_point(cl, kPi / 2, w);
    ASSERT_NE(cp, nullptr) << w;
    EXPECT_NEAR(cp->det_fiber_chart, 4.0, 1e-9);
    EXPECT_LT(cp->gradient_norm, 1e-9);
    ASSERT_TRUE(cp->morse_index.has_value());
    EXPECT_EQ(*cp->morse_index, 2);  // maximum of a(t) sin^2(omega)
  }
  // the xi_phi = 0 locus is reported separately
  EXPECT_GT(cl.branch_roots, 0);
}

TEST(Classify, HessianMatchesFiniteDifferences) {
  const auto s = make_sphere_profile();
  const auto q = make_quartic_profile(2.0);
  const std::vector<Cylinder> cyls = {{s, make_meridian(s, 0.0, 0.2, kPi - 0.2), 1.0},
                                      {s, wavy_equator_graph(s, 0.3, -3.0, 3.0), 1.0},
                                      {q, make_meridian(q, 0.0, 0.1, 1.9), 2.0}};
  for (const auto& c : cyls) {
    const auto cl = classify_curve(c.profile, c.curve, c.E1);
    ASSERT_FALSE(cl.critical_points.empty());
    for (const auto& cp : cl.critical_points) {
      const Sym2 fd = psi_hessian_fd_gradient(c, cp.tau, cp.omega, 1e-5);
      const Sym2& h = cp.hessian;
      const double scale = std::max({std::abs(h.xx), std::abs(h.xy), std::abs(h.yy)});
      EXPECT_LT(std::abs(fd.xx - h.xx) / scale, 1e-5);
      EXPECT_LT(std::abs(fd.xy - h.xy) / scale, 1e-5);
      EXPECT_LT(std::abs(fd.yy - h.yy) / scale, 1e-5);
      const Sym2 fv = psi_hessian_fd_values(c, cp.tau, cp.omega);
      EXPECT_LT(std::abs(fv.xx - h.xx) / scale, 1e-6);
      EXPECT_LT(std::abs(fv.yy - h.yy) / scale, 1e-6);
    }
  }
}

TEST(Classify, EquatorIsSingularOrbit) {
  const auto s = make_sphere_profile();
  const auto t0 = std::chrono::steady_clock::now();
  const auto cl = classify_curve(s, make_equator(s, 0.0, 2 * kPi), 1.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(secs, 1.0);
  EXPECT_EQ(cl.verdict, Verdict::NonGenericSingularOrbit);
  ASSERT_TRUE(cl.witness.has_value());
  ASSERT_FALSE(cl.arcs.empty());
  bool over_half_pi = false;
  for (const auto& a : cl.arcs)
    if (std::abs(std::cos(a.omega)) < 1e-9) over_half_pi = true;
  EXPECT_TRUE(over_half_pi);
  ASSERT_EQ(cl.singular_orbits.size(), 1u);
  EXPECT_DOUBLE_EQ(cl.singular_orbits[0].t_star, kPi / 2);
}

TEST(Classify, ParallelIsCaustic) {
  const auto s = make_sphere_profile();
  const auto cl = classify_curve(s, make_parallel(s, kPi / 3, 0.0, 2 * kPi), 1.0);
  EXPECT_EQ(cl.verdict, Verdict::NonGenericCaustic);
  EXPECT_TRUE(cl.witness.has_value());
  const auto q = make_quartic_profile(2.0);
  EXPECT_EQ(classify_curve(q, make_parallel(q, 0.6, 0.0, 3.0), 1.0).verdict, Verdict::NonGenericCaustic);
}

TEST(Classify, EquatorTangentGraphHasTangencyPoints) {
  const auto s = make_sphere_profile();
  const auto cl = classify_curve(s, wavy_equator_graph(s, 0.3, -3.0, 3.0), 1.0);
  // isolated points where sin(tau) = 0 and where the curve is tangent to a parallel
  for (double tau : {-kPi / 2, 0.0, kPi / 2})
    for (double w : {kPi / 2, 3 * kPi / 2}) EXPECT_NE(find_point(cl, tau, w, 1e-6), nullptr) << tau << " " << w;
  int tangencies = 0;
  for (const auto& cp : cl.critical_points)
    if (cp.parallel_tangency) {
      ++tangencies;
      EXPECT_FALSE(cp.over_equator);
    }
  EXPECT_EQ(tangencies, 4);
  EXPECT_TRUE(cl.arcs.empty());
  // both Hessian determinants are nonzero, so the strict Morse test passes
  EXPECT_EQ(cl.verdict, Verdict::Generic);
}

TEST(Classify, SingularOrbitIffImageOnEquator) {
  const auto s = make_sphere_profile();
  const auto q = make_quartic_profile(2.0);
  EXPECT_EQ(classify_curve(s, make_equator(s, 1.0, 2.0), 1.0).verdict, Verdict::NonGenericSingularOrbit);
  EXPECT_EQ(classify_curve(q, make_equator(q, 0.0, 3.0), 1.0).verdict, Verdict::NonGenericSingularOrbit);
  EXPECT_NE(classify_curve(s, make_parallel(s, 1.2, 0.0, 3.0), 1.0).verdict, Verdict::NonGenericSingularOrbit);
  EXPECT_NE(classify_curve(q, make_meridian(q, 0.0, 0.2, 1.8), 1.0).verdict, Verdict::NonGenericSingularOrbit);
  EXPECT_NE(classify_curve(s, wavy_equator_graph(s, 0.2, 0.5, 2.5), 1.0).verdict,
            Verdict::NonGenericSingularOrbit);
}

TEST(Classify, CriticalLocationsIndependentOfEnergy) {
  const auto q = make_quartic_profile(2.0);
  const Curve c = make_meridian(q, 0.0, 0.2, 1.8);
  const auto ref = classify_curve(q, c, 1.0);
  for (double E1 : {0.5, 4.0}) {
    const auto cl = classify_curve(q, c, E1);
    ASSERT_EQ(cl.critical_points.size(), ref.critical_points.size());
    for (std::size_t i = 0; i < cl.critical_points.size(); ++i) {
      EXPECT_NEAR(cl.critical_points[i].tau, ref.critical_points[i].tau, 1e-9);
      EXPECT_NEAR(cl.critical_points[i].omega, ref.critical_points[i].omega, 1e-9);
      EXPECT_NEAR(cl.critical_points[i].psi_value, E1 * ref.critical_points[i].psi_value, 1e-12);
    }
    EXPECT_EQ(cl.verdict, ref.verdict);
  }
}

TEST(Classify, RefusesWhenA1Fails) {
  const auto s = make_sphere_profile();
  EXPECT_THROW(classify_curve(s, make_meridian(s, 0.0, 0.2, 3.0), 0.0), ClassificationRefused);
}

TEST(Classify, DeterministicOrder) {
  const auto s = make_sphere_profile();
  const Curve c = wavy_equator_graph(s, 0.3, -3.0, 3.0);
  const auto a = classify_curve(s, c, 1.0);
  const auto b = classify_curve(s, c, 1.0);
  ASSERT_EQ(a.critical_points.size(), b.critical_points.size());
  for (std::size_t i = 0; i < a.critical_points.size(); ++i) {
    EXPECT_EQ(a.critical_points[i].tau, b.critical_points[i].tau);
    EXPECT_EQ(a.critical_points[i].omega, b.critical_points[i].omega);
  }
  for (std::size_t i = 1; i < a.critical_points.size(); ++i)
    EXPECT_LE(a.critical_points[i - 1].tau, a.critical_points[i].tau);
}

TEST(TangentInclusion, Examples) {
  const auto s = make_sphere_profile();
  const Cylinder mer{s, make_meridian(s, 0.0, 0.2, kPi - 0.2), 1.0};
  EXPECT_TRUE(tangent_inclusion_test(s, mer, kPi / 2, kPi / 2));
  EXPECT_FALSE(tangent_inclusion_test(s, mer, 1.0, kPi / 3));
  const Cylinder eq{s, make_equator(s, 0.0, 2 * kPi), 1.0};
  for (double tau : {0.0, 1.0, 4.0}) EXPECT_TRUE(tangent_inclusion_test(s, eq, tau, kPi / 2));
  // on the xi_phi = 0 fiber point the omega pairing vanishes; the tau pairing decides
  EXPECT_TRUE(tangent_inclusion_test(s, mer, 1.0, 0.0));
}

TEST(TangentInclusion, EquivalentToVanishingGradient) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto s = make_sphere_profile();
  const auto q = make_quartic_profile(2.0);
  const std::vector<Cylinder> cyls = {{s, make_meridian(s, 0.0, 0.2, kPi - 0.2), 1.0},
                                      {s, make_equator(s, 0.0, 2 * kPi), 1.0},
                                      {s, wavy_equator_graph(s, 0.3, -3.0, 3.0), 2.0},
                                      {q, make_meridian(q, 0.0, 0.1, 1.9), 1.0},
                                      {q, make_parallel(q, 0.7, 0.0, 3.0), 0.5}};
  int agree = 0, critical = 0;
  for (int i = 0; i < 2000; ++i) {
    const Cylinder& c = cyls[i % cyls.size()];
    double tau = c.curve.tau_a + (c.curve.tau_b - c.curve.tau_a) * u(rng);
    double w = 2 * kPi * u(rng);
    if (i % 3 == 0) w = (i % 2 ? 0.0 : kPi / 2);  // critical fibers
    const auto g = psi_gradient(c, tau, w);
    const bool crit = std::hypot(g[0], g[1]) < 1e-9;
    critical += crit;
    agree += crit == tangent_inclusion_test(c.profile, c, tau, w, 1e-9);
  }
  EXPECT_EQ(agree, 2000);
  EXPECT_GT(critical, 100);
}
