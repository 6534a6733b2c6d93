#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "qcilab/asymptotics.hpp"

using namespace qcilab;

namespace {

std::vector<double> ladder(double lo, double hi, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(lo * std::pow(hi / lo, k / (n - 1.0)));
  return out;
}

GrowthSeries synth(const std::function<double(double)>& law, const std::vector<double>& lams,
                   double noise = 0.0, std::mt19937_64* rng = nullptr) {
  GrowthSeries s;
  s.curve_id = "synthetic";
  std::normal_distribution<double> g(0.0, 1.0);
  for (double lam : lams) {
    RestrictionSample x;
    x.lambda = lam;
    x.value = law(lam) * (noise > 0.0 ? 1.0 + noise * g(*rng) : 1.0);
    x.quad_error = 1e-8;
    x.curve_id = s.curve_id;
    s.samples.push_back(x);
  }
  return s;
}

const auto kConst = [](double) { return 5.0; };
const auto kLog = [](double l) { return 2.0 + 0.1013 * std::log(l); };
const auto kPow = [](double l) { return 0.5641 * std::sqrt(l); };

}  // namespace

TEST(FitGrowth, ExactConstant) {
  const auto f = fit_growth(synth(kConst, ladder(50, 3000, 12)));
  EXPECT_EQ(f.best, GrowthModel::Constant);
  EXPECT_NEAR(f.fit(GrowthModel::Constant).coefficients[0], 5.0, 1e-12);
  EXPECT_EQ(f.sample_count, 12u);
}

TEST(FitGrowth, ExactLog) {
  const auto f = fit_growth(synth(kLog, ladder(50, 3000, 12)));
  EXPECT_EQ(f.best, GrowthModel::Log);
  EXPECT_NEAR(f.fit(GrowthModel::Log).coefficients[1], 0.1013, 1e-10);
  EXPECT_NEAR(f.fit(GrowthModel::Log).coefficients[0], 2.0, 1e-10);
  EXPECT_GE(f.dominance, 0.1);
}

TEST(FitGrowth, ExactPower) {
  const auto f = fit_growth(synth(kPow, ladder(50, 3000, 12)));
  EXPECT_EQ(f.best, GrowthModel::Power);
  EXPECT_NEAR(f.alpha, 0.5, 0.01);
  EXPECT_NEAR(f.fit(GrowthModel::Power).coefficients[0], 0.5641, 1e-9);
}

TEST(FitGrowth, AllModelsReported) {
  const auto f = fit_growth(synth(kLog, ladder(50, 3000, 8)));
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(static_cast<int>(f.models[k].model), k);
    EXPECT_TRUE(std::isfinite(f.models[k].residual_rms));
  }
}

TEST(FitGrowth, RejectsInvalidSeries) {
  EXPECT_THROW(fit_growth(synth(kConst, ladder(50, 3000, 5))), InvalidInput);
  auto s = synth(kConst, ladder(50, 3000, 8));
  std::swap(s.samples[2], s.samples[3]);
  EXPECT_THROW(fit_growth(s), InvalidInput);
  s = synth(kConst, ladder(50, 3000, 8));
  s.samples[0].lambda = 0.0;
  EXPECT_THROW(fit_growth(s), InvalidInput);
}

TEST(FitGrowth, WeightsFollowQuadratureError) {
  // an outlier with a large quadrature error barely moves the fit
  auto s = synth(kConst, ladder(50, 3000, 10));
  s.samples[4].value = 50.0;
  s.samples[4].quad_error = 1.0;
  const auto f = fit_growth(s);
  EXPECT_NEAR(f.fit(GrowthModel::Constant).coefficients[0], 5.0, 1e-6);
}

TEST(FitGrowth, ModelRecoveryUnderNoise) {
  std::mt19937_64 rng(20240611);
  const auto lams = ladder(50, 3000, 20);
  const std::function<double(double)> laws[] = {kConst, kLog, kPow};
  for (int k = 0; k < 3; ++k) {
    int hits = 0;
    FitOptions fo;
    fo.bootstrap_resamples = 0;
    for (int trial = 0; trial < 1000; ++trial)
      if (static_cast<int>(fit_growth(synth(laws[k], lams, 0.01, &rng), fo).best) == k) ++hits;
    EXPECT_GE(hits, 950) << to_string(static_cast<GrowthModel>(k));
  }
}

TEST(FitGrowth, ScaleEquivariance) {
  std::mt19937_64 rng(3);
  const std::function<double(double)> laws[] = {kConst, kLog, kPow};
  for (const auto& law : laws) {
    const auto s = synth(law, ladder(50, 3000, 12), 0.01, &rng);
    auto t = s;
    for (auto& x : t.samples) x.value *= 7.5;
    const auto a = fit_growth(s);
    const auto b = fit_growth(t);
    EXPECT_EQ(a.best, b.best);
    EXPECT_NEAR(a.alpha, b.alpha, 1e-12);
    EXPECT_NEAR(b.fit(GrowthModel::Constant).coefficients[0], 7.5 * a.fit(GrowthModel::Constant).coefficients[0], 1e-10);
    for (int c = 0; c < 2; ++c)
      EXPECT_NEAR(b.fit(GrowthModel::Log).coefficients[c], 7.5 * a.fit(GrowthModel::Log).coefficients[c], 1e-10);
    EXPECT_NEAR(b.fit(GrowthModel::Power).coefficients[0] / a.fit(GrowthModel::Power).coefficients[0], 7.5, 1e-10);
  }
}

TEST(FitGrowth, BootstrapDeterministicPerSeed) {
  std::mt19937_64 rng(9);
  const auto s = synth(kPow, ladder(50, 3000, 12), 0.01, &rng);
  FitOptions fo;
  fo.seed = 42;
  EXPECT_EQ(fit_growth(s, fo).alpha_stderr, fit_growth(s, fo).alpha_stderr);
  EXPECT_GT(fit_growth(s, fo).alpha_stderr, 0.0);
  const auto f = fit_growth(s, fo);
  EXPECT_NEAR(f.alpha_ci[0], f.alpha - 1.96 * f.alpha_stderr, 1e-15);
}

TEST(FitGrowth, MoreLargeLambdaDataNeverInflatesStderr) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto full = synth(kPow, ladder(50, 6000, 18), 0.01, &rng);
    GrowthSeries head = full;
    head.samples.resize(12);
    const double se_head = fit_growth(head).alpha_stderr;
    const double se_full = fit_growth(full).alpha_stderr;
    EXPECT_LE(se_full, 2.0 * se_head) << trial;
  }
}

TEST(Saturation, StableHighestWeightLike) {
  const auto s = synth(kPow, ladder(50, 2000, 12));
  const auto r = saturation_check(s, Stability::Stable);
  EXPECT_EQ(r.verdict, SaturationVerdict::Saturated);
  EXPECT_NEAR(r.c_gamma, 0.5641, 1e-9);
  EXPECT_EQ(r.window_start, 6u);
}

TEST(Saturation, LogAndBoundedSeriesNotSaturated) {
  EXPECT_EQ(saturation_check(synth(kLog, ladder(100, 3000, 12)), Stability::Stable).verdict,
            SaturationVerdict::NotSaturated);
  EXPECT_EQ(saturation_check(synth(kConst, ladder(100, 3000, 12)), Stability::Stable).verdict,
            SaturationVerdict::NotSaturated);
}

TEST(Saturation, UnstableBranchOnSyntheticSeries) {
  const auto lost = synth([](double l) { return 0.4 * std::sqrt(l) / std::log(l); }, ladder(50, 5000, 12));
  const auto r = saturation_check(lost, Stability::Unstable);
  EXPECT_EQ(r.verdict, SaturationVerdict::Saturated);
  EXPECT_NEAR(r.unstable_slope, 0.0, 1e-9);
  const auto weak = synth([](double l) { return std::pow(l, 0.2); }, ladder(50, 5000, 12));
  EXPECT_EQ(saturation_check(weak, Stability::Unstable).verdict, SaturationVerdict::NotSaturated);
  EXPECT_EQ(saturation_check(synth(kPow, ladder(50, 5000, 12)), Stability::Unstable).verdict,
            SaturationVerdict::Saturated);
}

TEST(Saturation, PropagatesFitRefusal) {
  EXPECT_THROW(saturation_check(synth(kPow, ladder(50, 2000, 4)), Stability::Stable), InvalidInput);
}

TEST(TheoremVerdict, RuleTable) {
  const auto log_fit = fit_growth(synth(kLog, ladder(50, 3000, 12)));
  const auto pow_fit = fit_growth(synth(kPow, ladder(50, 3000, 12)));
  const auto const_fit = fit_growth(synth(kConst, ladder(50, 3000, 12)));
  EXPECT_EQ(theorem_verdict(Verdict::Generic, log_fit).status, Consistency::Consistent);
  EXPECT_EQ(theorem_verdict(Verdict::Generic, const_fit).status, Consistency::Consistent);
  EXPECT_EQ(theorem_verdict(Verdict::NonGenericSingularOrbit, pow_fit).status, Consistency::Consistent);
  const auto flagged = theorem_verdict(Verdict::Generic, pow_fit);
  EXPECT_EQ(flagged.status, Consistency::Inconsistent);
  EXPECT_FALSE(flagged.evidence.empty());
  EXPECT_FALSE(flagged.expected.empty());
  EXPECT_EQ(theorem_verdict(Verdict::NonGenericSingularOrbit, log_fit, true).status, Consistency::Inconsistent);
  EXPECT_EQ(theorem_verdict(Verdict::NonGenericSingularOrbit, log_fit, false).status, Consistency::Consistent);
  EXPECT_EQ(theorem_verdict(Verdict::NonGenericCaustic, pow_fit).status, Consistency::NotAssessed);
  const auto steep = fit_growth(synth([](double l) { return std::pow(l, 0.8); }, ladder(50, 3000, 12)));
  EXPECT_EQ(theorem_verdict(Verdict::NonGenericSingularOrbit, steep, false).status, Consistency::Inconsistent);
}
