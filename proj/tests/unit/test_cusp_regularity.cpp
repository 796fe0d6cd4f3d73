#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qcml/cusp_regularity.hpp"
#include "qcml/errors.hpp"
#include "qcml/numerics.hpp"

using namespace qcml;

TEST(CuspWeights, ConvexityValidation) {
  EXPECT_NO_THROW(WeightFunction::power_log(2, 3));
  EXPECT_NO_THROW(WeightFunction::power_log(2, -1));
  EXPECT_THROW(WeightFunction::power_log(1, -5), Error);
  EXPECT_THROW(WeightFunction::power_log(0.5, 0), Error);
}

TEST(CuspGauge, DerivativeMatchesDifferenceQuotient) {
  const auto g = ContinuityGauge::log_power(1.5, 2.0);
  for (double t : {1e-8, 1e-4, 0.1}) {
    const double h = 1e-5 * t;
    EXPECT_NEAR(g.derivative(t), (g.value(t + h) - g.value(t - h)) / (2 * h), 1e-7 * g.derivative(t));
  }
}

TEST(CuspIntegral, PartialMatchesDirectQuadrature) {
  const auto phi = WeightFunction::power_log(2, 1);
  const auto g = ContinuityGauge::log_power(1);
  const double t_floor = 1e-6;
  const auto rep = phi_psiprime_integral(phi, g, t_floor);
  // Direct integral in t with breakpoints at every decade.
  std::vector<double> br;
  for (double t = 1e-5; t < 0.3; t *= 10) br.push_back(t);
  const double direct = 2 * std::numbers::pi *
                        integrate([&](double t) { return phi.value(g.derivative(t)) * t; }, t_floor, 1 / std::numbers::e,
                                  br, 1e-10);
  EXPECT_NEAR(rep.partial / direct, 1.0, 1e-8);
}

TEST(CuspIntegral, VerdictsAroundHarmonicThreshold) {
  const auto g = ContinuityGauge::log_power(1);
  EXPECT_EQ(phi_psiprime_integral(WeightFunction::power_log(2, 0), g, 1e-3).verdict, Integrability::Integrable);
  EXPECT_EQ(phi_psiprime_integral(WeightFunction::power_log(2, 2.5), g, 1e-3).verdict, Integrability::Integrable);
  EXPECT_EQ(phi_psiprime_integral(WeightFunction::power_log(2, 3.5), g, 1e-3).verdict, Integrability::Divergent);
  EXPECT_EQ(phi_psiprime_integral(WeightFunction::power_log(2, 3), g, 1e-3).verdict, Integrability::Divergent);
}

TEST(CuspIntegral, TailExponentGrid) {
  int pairs = 0;
  for (double p : {0.5, 1.0, 2.0})
    for (double q = 0; q <= 6 && pairs < 20; q += 1) {
      const auto rep = phi_psiprime_integral(WeightFunction::power_log(2, q), ContinuityGauge::log_power(p), 1e-3);
      EXPECT_NEAR(rep.tail_exponent, q - 2 * p - 2, 0.05) << p << " " << q;
      ++pairs;
    }
  EXPECT_EQ(pairs, 20);
}

TEST(CuspIntegral, VerdictMonotoneInQAndScaleInvariant) {
  const double p = 0.5;
  bool seen_divergent = false;
  for (double q = 0; q <= 4; q += 0.25) {
    const auto v = phi_psiprime_integral(WeightFunction::power_log(2, q), ContinuityGauge::log_power(p), 1e-3).verdict;
    if (seen_divergent) EXPECT_EQ(v, Integrability::Divergent) << q;
    seen_divergent = seen_divergent || v == Integrability::Divergent;
    for (double Cc : {0.1, 10.0})
      EXPECT_EQ(phi_psiprime_integral(WeightFunction::power_log(2, q), ContinuityGauge::log_power(p, Cc), 1e-3).verdict, v);
  }
  EXPECT_TRUE(seen_divergent);
}

TEST(CuspCritical, BisectionRecoversFormula) {
  EXPECT_EQ(critical_exponent(1), 3);
  EXPECT_EQ(critical_exponent(0.5), 2);
  for (double p : {0.5, 1.0, 2.0}) {
    const auto s = critical_exponent_search(p);
    EXPECT_NEAR(s.estimate, 2 * p + 1, 0.05) << p;
  }
}

TEST(CuspDoubling, ObservedWithinAnalytic) {
  auto rows = doubling_check(WeightFunction::power_log(2, 0), {1, 2});
  EXPECT_NEAR(rows[0].observed, 1.0, 1e-14);
  EXPECT_NEAR(rows[1].observed, 4.0, 1e-12);
  rows = doubling_check(WeightFunction::power_log(2, 3), {10});
  EXPECT_TRUE(rows[0].certified);
  EXPECT_LE(rows[0].observed, rows[0].analytic);
}
