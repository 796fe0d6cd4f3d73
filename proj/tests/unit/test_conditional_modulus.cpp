#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qcml/conditional_modulus.hpp"
#include "qcml/errors.hpp"

using namespace qcml;

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n, double shape) {
  std::gamma_distribution<double> gam(shape, 1.0);
  std::vector<double> b(n);
  double s = 0;
  for (auto& v : b) s += (v = gam(rng));
  for (auto& v : b) v /= s;
  return b;
}
}  // namespace

TEST(RadialModulus, RoundAnnulus) {
  RadialProfile one{[](double) { return 1.0; }, {}};
  EXPECT_NEAR(radial_weighted_modulus(one, AnnulusSpec::from_radii(0.1, 0.7)), kTwoPi / std::log(7.0), 1e-12);
  EXPECT_NEAR(radial_weighted_modulus(one, AnnulusSpec::from_radii(std::exp(-1.0), 1.0)), kTwoPi, 1e-12);
}

TEST(RadialModulus, LogarithmicDistortion) {
  // K(u) = log(1/u) on [e^{-e^3}, e^{-e}]: integral of dt/t over [e, e^3] is 2.
  RadialProfile k{[](double t) { return t; }, {}};
  const auto ann = AnnulusSpec::from_log(std::exp(3.0), std::exp(1.0));
  EXPECT_NEAR(radial_weighted_modulus(k, ann), std::numbers::pi, 1e-10);
}

TEST(RadialModulus, RejectsSubunitDistortion) {
  RadialProfile k{[](double) { return 0.5; }, {}};
  EXPECT_THROW(radial_weighted_modulus(k, AnnulusSpec::from_log(2, 1)), Error);
}

TEST(ExtremalProfile, SingleShell) {
  auto psi = Gauge::exponential(1);
  DistortionBudget B(kTwoPi);
  auto prof = extremal_profile(psi, B, {0, 1});
  ASSERT_EQ(prof.b.size(), 1u);
  EXPECT_NEAR(prof.b[0], 1.0, 1e-12);
  EXPECT_NEAR(prof.a[0], 1.0 / psi.inverse(std::exp(2.0)), 1e-12);
}

TEST(ExtremalProfile, SingleShellCappedThrows) {
  // I0 e^2 < psi(1): every shell saturates the cap.
  auto psi = Gauge::exponential(5);
  DistortionBudget B(kTwoPi * 1e-3);
  try {
    extremal_profile(psi, B, {0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Solver);
  }
}

TEST(ExtremalProfile, InvariantsAndCertificate) {
  for (const auto& psi : {Gauge::exponential(1), Gauge::power_exponential(1, 2), Gauge::sub_exponential_log(1, 1),
                          Gauge::power_lp(2)}) {
    DistortionBudget B(kTwoPi);
    auto prof = extremal_profile(psi, B, {0, 40});
    double bsum = 0, spend = 0;
    for (std::size_t i = 0; i < prof.b.size(); ++i) {
      const int j = static_cast<int>(i) + 1;
      bsum += prof.b[i];
      EXPECT_GT(prof.a[i], 0);
      EXPECT_LE(prof.a[i], 1.0);
      EXPECT_GE(prof.K[i], 1.0);
      if (!prof.capped[i]) spend += std::exp(psi.log_gauge(prof.K[i]) - 2.0 * j);
    }
    EXPECT_NEAR(bsum, 1.0, 1e-10);
    EXPECT_LE(spend, B.I0() * (1 + 1e-8));
    EXPECT_LT(prof.stationarity_residual, 1e-8);
    // The objective equals the shell objective at the reported b.
    EXPECT_NEAR(shell_objective(psi, B, {0, 40}, prof.b), prof.objective, 1e-9);
  }
}

TEST(ExtremalProfile, DirichletRandomOracleFindsNothingBetter) {
  auto psi = Gauge::exponential(1);
  DistortionBudget B(kTwoPi);
  const ShellRange sh{0, 40};
  auto prof = extremal_profile(psi, B, sh);
  std::mt19937_64 rng(20240611);
  double best_random = 1e300;
  for (int trial = 0; trial < 10000; ++trial) {
    const double shape = trial % 3 == 0 ? 1.0 : (trial % 3 == 1 ? 0.2 : 5.0);
    auto b = dirichlet(rng, 40, shape);
    best_random = std::min(best_random, shell_objective(psi, B, sh, b));
  }
  EXPECT_GE(best_random, prof.objective - 1e-12);
}

TEST(ExtremalProfile, LocalPerturbationsDoNotImprove) {
  for (const auto& psi : {Gauge::exponential(1), Gauge::sub_exponential_log(2, 0.5)}) {
    DistortionBudget B(kTwoPi);
    const ShellRange sh{0, 30};
    auto prof = extremal_profile(psi, B, sh);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd(0, 1);
    for (int trial = 0; trial < 2000; ++trial) {
      auto b = prof.b;
      const double eps = std::pow(10.0, -2 - trial % 5);
      double s = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] > 0) b[i] *= std::exp(eps * nd(rng));
        s += b[i];
      }
      for (auto& v : b) v /= s;
      ASSERT_GE(shell_objective(psi, B, sh, b), prof.objective * (1 - 1e-8));
    }
  }
}

TEST(ExtremalProfile, BudgetDoublingMovesObjectiveByAtMostOne) {
  for (double p : {0.5, 1.0, 2.0}) {
    auto psi = Gauge::exponential(p);
    for (double I : {1.0, kTwoPi, 100.0}) {
      const double v1 = extremal_profile(psi, DistortionBudget(I), {0, 60}).objective;
      const double v2 = extremal_profile(psi, DistortionBudget(2 * I), {0, 60}).objective;
      EXPECT_GE(v1, v2 - 1e-12);
      EXPECT_LE(v1 - v2, 1.0);
    }
  }
}

TEST(ExtremalProfile, RadialModulusOfExtremalProfile) {
  auto psi = Gauge::power_exponential(1, 1.5);
  auto prof = extremal_profile(psi, DistortionBudget(kTwoPi), {3, 50});
  const auto ann = AnnulusSpec::from_log(51, 4);
  const double M = radial_weighted_modulus(shell_profile_as_radial(prof), ann);
  EXPECT_NEAR(M / (kTwoPi / prof.objective), 1.0, 1e-8);
}

TEST(Bracket, GapAtMostOne) {
  auto psi = Gauge::exponential(1);
  for (int n : {20, 80, 320}) {
    auto br = conditional_modulus_bracket(psi, DistortionBudget(kTwoPi), {0, n});
    EXPECT_GE(br.upper_inv - br.lower_inv, 0.0);
    EXPECT_LE(br.upper_inv - br.lower_inv, 1.0 + 1e-6) << n;
    EXPECT_LE(br.lower, br.upper);
  }
}

TEST(Bracket, SingleShellClosedForm) {
  auto psi = Gauge::exponential(1);
  auto br = conditional_modulus_bracket(psi, DistortionBudget(kTwoPi), {3, 4});
  EXPECT_NEAR(br.upper_inv, 1.0 / 8.0, 1e-12);
  EXPECT_NEAR(br.lower_inv, 1.0 / 10.0, 1e-12);
}

TEST(Bracket, LowerNonincreasingInN) {
  auto psi = Gauge::exponential(1);
  double prev = 1e300;
  for (int n = 10; n <= 100; n += 10) {
    auto br = conditional_modulus_bracket(psi, DistortionBudget(kTwoPi), {0, n});
    EXPECT_LE(br.lower, prev * (1 + 1e-12));
    prev = br.lower;
  }
}

TEST(Bracket, AnnulusMapsToShells) {
  const auto s = AnnulusSpec::from_log(20.5, 1.5).shells();
  EXPECT_EQ(s.m, 2);
  EXPECT_EQ(s.n, 20);
}

TEST(Asymptotic, ExponentialLogLogDifference) {
  const auto ann = AnnulusSpec::from_log(std::exp(10.0), std::exp(1.0));
  EXPECT_NEAR(asymptotic_inverse_modulus(Gauge::exponential(2), ann), 9.0, 1e-8);
}

TEST(Asymptotic, MatchesExponentialClosedForms) {
  for (double p : {0.5, 1.0, 2.0}) {
    const auto ann = AnnulusSpec::from_log(1e4, 10);
    for (const auto& psi : {Gauge::exponential(p), Gauge::power_exponential(p, 1.5), Gauge::power_exponential(p, 2)}) {
      const double a = asymptotic_inverse_modulus(psi, ann);
      const double c = closed_form_inverse_modulus(psi, ann);
      EXPECT_NEAR(a / c, 1.0, 1e-8);
      EXPECT_NEAR(closed_form_modulus(psi, ann), kTwoPi / c, 1e-12);
    }
  }
}

TEST(Asymptotic, CapBelowPsiOfOne) {
  // For t < g(1)/2 the integrand is the cap value 1.
  auto psi = Gauge::exponential(4);
  const auto ann = AnnulusSpec::from_log(1.5, 0.0);
  EXPECT_NEAR(asymptotic_inverse_modulus(psi, ann), 1.5, 1e-12);
}

TEST(ClosedForm, UnsupportedKinds) {
  try {
    closed_form_modulus(Gauge::power_lp(2), AnnulusSpec::from_log(100, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedKind);
  }
}

TEST(ClosedForm, SubExponentialExamples) {
  const auto ann = AnnulusSpec::from_log(1e6, 20);
  const double LL = std::log(1e6), LR = std::log(20.0);
  EXPECT_NEAR(closed_form_inverse_modulus(Gauge::sub_exponential_log(1, 1), ann), 0.5 * (std::log(LL) - std::log(LR)), 1e-14);
  EXPECT_NEAR(closed_form_inverse_modulus(Gauge::sub_exponential_log(2, 0.5), ann), 2 * (std::sqrt(LL) - std::sqrt(LR)), 1e-14);
}

TEST(ErrorBound, ExponentialExplicitValues) {
  auto psi = Gauge::exponential(1);
  DistortionBudget B(kTwoPi);
  double prev = 1e300;
  for (int m : {2, 5, 10}) {
    const double x0 = 2.0 * m - 2 * std::log(2.0 * m);
    const double expect = 3 * (2 + std::log(x0)) / x0;
    const double got = asymptotic_error_bound(psi, B, m);
    EXPECT_NEAR(got / expect, 1.0, 1e-7) << m;
    EXPECT_LT(got, prev);
    prev = got;
  }
}
