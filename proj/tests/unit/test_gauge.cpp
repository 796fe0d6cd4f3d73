#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qcml/errors.hpp"
#include "qcml/gauge.hpp"
#include "qcml/numerics.hpp"

using namespace qcml;

namespace {

std::vector<Gauge> parameter_grid() {
  std::vector<Gauge> out;
  for (double p : {0.5, 1.0, 2.0, 5.0}) {
    out.push_back(Gauge::exponential(p));
    for (double a : {1.0, 1.5, 2.0}) out.push_back(Gauge::power_exponential(p, a));
    for (double b : {0.25, 0.5, 1.0}) {
      out.push_back(Gauge::sub_exponential_log(p, b));
      out.push_back(Gauge::sub_exponential_log(p, b, 1.0));
    }
    if (p >= 1) out.push_back(Gauge::power_lp(p));
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return xs;
}

}  // namespace

TEST(Gauge, EvalExamples) {
  EXPECT_NEAR(Gauge::exponential(1).eval(1), std::numbers::e, 1e-15);
  EXPECT_NEAR(Gauge::power_exponential(2, 2).eval(1), std::exp(2.0), 1e-14);
  EXPECT_NEAR(Gauge::power_lp(3).eval(2), 8.0, 1e-13);
}

TEST(Gauge, InverseExamples) {
  EXPECT_NEAR(Gauge::exponential(1).inverse(std::numbers::e), 1.0, 1e-15);
  EXPECT_NEAR(Gauge::power_exponential(1, 2).inverse(std::exp(4.0)), 2.0, 1e-14);
  EXPECT_NEAR(Gauge::exponential(2).inverse(std::exp(10.0)), 5.0, 1e-14);
}

TEST(Gauge, InverseBelowRangeThrows) {
  try {
    Gauge::exponential(1).inverse(1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BelowRange);
  }
}

TEST(Gauge, DomainErrorBelowOne) {
  try {
    Gauge::exponential(1).eval(0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(Gauge, LogGaugeExamples) {
  auto e = Gauge::exponential(3);
  EXPECT_DOUBLE_EQ(e.log_gauge(4), 12.0);
  EXPECT_DOUBLE_EQ(e.log_gauge_derivative(4), 3.0);
  auto pe = Gauge::power_exponential(1, 2);
  EXPECT_DOUBLE_EQ(pe.log_gauge(3), 9.0);
  EXPECT_DOUBLE_EQ(pe.log_gauge_derivative(3), 6.0);
  auto s = Gauge::sub_exponential_log(1, 1);
  const double x = std::exp(2.0);
  EXPECT_NEAR(s.log_gauge(x), x / 2, 1e-13);
  const double h = 1e-6 * x;
  const double fd = (s.log_gauge(x + h) - s.log_gauge(x - h)) / (2 * h);
  EXPECT_NEAR(s.log_gauge_derivative(x) / fd, 1.0, 1e-6);
}

TEST(Gauge, MonotoneConvexOnGrid) {
  const auto xs = log_grid(1, 1e6, 1000);
  for (const auto& g : parameter_grid()) {
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      const double g0 = g.log_gauge(xs[i - 1]), g2 = g.log_gauge(xs[i + 1]);
      ASSERT_GT(g.log_gauge(xs[i]), g0) << gauge_kind_name(g.kind()) << " p=" << g.p() << " x=" << xs[i];
      // psi(mid) <= (psi(x0) + psi(x2)) / 2, compared in log space.
      const double mid = g.log_gauge(0.5 * (xs[i - 1] + xs[i + 1]));
      const double chord = log_add_exp(g0, g2) - std::log(2.0);
      ASSERT_LE(mid, chord + 1e-9 * std::fabs(chord) + 1e-12) << gauge_kind_name(g.kind()) << " x=" << xs[i];
    }
  }
}

TEST(Gauge, InverseRoundTrip) {
  const auto xs = log_grid(1, 1e6, 1000);
  for (const auto& g : parameter_grid()) {
    for (double x : xs) {
      const double back = g.inverse_log(g.log_gauge(x));
      ASSERT_NEAR(back / x, 1.0, 1e-9) << gauge_kind_name(g.kind()) << " p=" << g.p() << " x=" << x;
      const double y = g.log_gauge(x);
      const double again = g.log_gauge(g.inverse_log(y));
      ASSERT_NEAR(again, y, 1e-9 * std::fabs(y));
      if (y < 700) ASSERT_NEAR(g.inverse(g.eval(x)) / x, 1.0, 1e-9);
    }
  }
}

TEST(Gauge, DerivativeMatchesCenteredDifference) {
  for (const auto& g : parameter_grid()) {
    for (double x : log_grid(2, 1e5, 200)) {
      const double h = 1e-6 * x;
      const double fd = (g.log_gauge(x + h) - g.log_gauge(x - h)) / (2 * h);
      ASSERT_NEAR(g.log_gauge_derivative(x) / fd, 1.0, 1e-6) << gauge_kind_name(g.kind()) << " x=" << x;
      ASSERT_GT(g.log_gauge_derivative(x), 0);
    }
  }
}

TEST(Gauge, SecondDerivativeMatchesDifference) {
  for (const auto& g : parameter_grid()) {
    for (double x : log_grid(2, 1e5, 50)) {
      const double h = 1e-4 * x;
      const double fd = (g.log_gauge_derivative(x + h) - g.log_gauge_derivative(x - h)) / (2 * h);
      ASSERT_NEAR(g.log_gauge_second_derivative(x), fd, 1e-6 * std::fabs(fd) + 1e-12);
    }
  }
}

TEST(Cavitation, AnalyticDichotomyOverGrid) {
  for (const auto& g : parameter_grid()) {
    const auto rep = cavitation_test(g);
    EXPECT_TRUE(rep.analytic);
    const bool lp = g.kind() == GaugeKind::PowerLp;
    EXPECT_EQ(rep.verdict, lp ? Cavitation::Convergent : Cavitation::Divergent) << gauge_kind_name(g.kind());
    // The quadrature certificate agrees with the fast path.
    const std::size_t n = rep.ratios.size();
    bool grows = rep.ratios[n - 1] > 0.9 && rep.ratios[n - 2] > 0.9 && rep.ratios[n - 3] > 0.9;
    EXPECT_EQ(grows, !lp) << gauge_kind_name(g.kind()) << " p=" << g.p() << " beta=" << g.beta();
  }
}

TEST(Cavitation, PowerLpIntegralValue) {
  auto rep = cavitation_test(Gauge::power_lp(5));
  EXPECT_NEAR(rep.integral, 5 * (1 + std::log(2.0)) / 2, 1e-14);
}

TEST(Cavitation, TabulatedExponentialDiverges) {
  std::vector<std::pair<double, double>> s;
  for (double x = 1; x <= 1e5; x *= 1.05) s.push_back({x, std::exp(0.001 * x)});
  auto rep = cavitation_test(Gauge::tabulated(s));
  EXPECT_FALSE(rep.analytic);
  EXPECT_EQ(rep.verdict, Cavitation::Divergent);
}

TEST(Cavitation, TabulatedPowerConverges) {
  std::vector<std::pair<double, double>> s;
  for (double x = 1; x <= 1e7; x *= 1.05) s.push_back({x, std::pow(x, 5.0)});
  auto rep = cavitation_test(Gauge::tabulated(s));
  EXPECT_EQ(rep.verdict, Cavitation::Convergent);
  EXPECT_NEAR(rep.integral, 5 * (1 + std::log(2.0)) / 2, 0.05);
}

TEST(Cavitation, ShortTableUndecidable) {
  std::vector<std::pair<double, double>> s;
  for (double x = 1; x <= 5000; x *= 1.1) s.push_back({x, std::exp(x / 100)});
  try {
    cavitation_test(Gauge::tabulated(s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Undecidable);
  }
}

TEST(Gauge, TabulatedRejectsConcaveData) {
  std::vector<std::pair<double, double>> s{{1, 1}, {2, 3}, {3, 4}, {4, 4.5}};
  EXPECT_THROW(Gauge::tabulated(s), Error);
}

TEST(Gauge, TabulatedInterpolationAndExtrapolation) {
  std::vector<std::pair<double, double>> s;
  for (double x = 1; x <= 100; x += 1) s.push_back({x, std::exp(0.3 * x)});
  auto g = Gauge::tabulated(s);
  EXPECT_NEAR(g.log_gauge(10.5), 3.15, 1e-12);
  EXPECT_NEAR(g.inverse_log(3.15), 10.5, 1e-12);
  EXPECT_NEAR(g.log_gauge_derivative(10.5), 0.3, 1e-6);
  try {
    g.eval(150);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Extrapolation);
  }
}
