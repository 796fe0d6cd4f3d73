#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "qcml/errors.hpp"
#include "qcml/finite_distortion_maps.hpp"

using namespace qcml;

namespace {

constexpr double kPi = std::numbers::pi;

// Distortion from a five-point finite-difference Jacobian through the complex
// derivatives: K = (|f_z| + |f_zbar|) / (|f_z| - |f_zbar|).
double fd_distortion(const RadialMap& f, double x, double y) {
  const double h = 1e-3 * std::hypot(x, y);
  auto d = [&](double ex, double ey) {
    auto at = [&](double s) { return f(x + s * h * ex, y + s * h * ey); };
    return (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12 * h);
  };
  const std::complex<double> fx = d(1, 0), fy = d(0, 1);
  const std::complex<double> I(0, 1);
  const double a = std::abs(0.5 * (fx - I * fy));
  const double b = std::abs(0.5 * (fx + I * fy));
  return (a + b) / (a - b);
}

void check_oracle(const RadialMap& f, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logr(std::log(1e-3), std::log(0.95)), ang(0, 2 * kPi);
  const DistortionProfile K = distortion(f);
  int checked = 0;
  while (checked < 100) {
    const double r = std::exp(logr(rng)), t = ang(rng);
    if (std::fabs(r - 1 / std::numbers::e) < 0.01) continue;
    const double oracle = fd_distortion(f, r * std::cos(t), r * std::sin(t));
    EXPECT_NEAR(K(r) / oracle, 1.0, 1e-5) << "r = " << r;
    ++checked;
  }
}

}  // namespace

TEST(Distortion, MatchesFiniteDifferenceOracle) {
  check_oracle(RadialMap::power_stretch(3), 1);
  check_oracle(RadialMap::identity(), 2);
  check_oracle(RadialMap::identity(1), 3);
  check_oracle(RadialMap::identity(5), 4);
  check_oracle(RadialMap::power_stretch(2, 0.7), 5);
  check_oracle(RadialMap::sub_exp_example(1, 0.5), 6);
  check_oracle(RadialMap::sub_exp_example(1, -0.2, 0.3), 7);
}

TEST(Distortion, KnownConstants) {
  EXPECT_NEAR(distortion(RadialMap::power_stretch(3))(0.01), 3.0, 1e-14);
  EXPECT_NEAR(distortion(RadialMap::identity())(0.3), 1.0, 1e-14);
  EXPECT_NEAR(distortion(RadialMap::identity(1))(0.3), (3 + std::sqrt(5.0)) / 2, 1e-12);
  const double g = 5;
  EXPECT_NEAR(distortion(RadialMap::identity(g))(1e-6),
              (std::sqrt(4 + g * g) + g) / (std::sqrt(4 + g * g) - g), 1e-9);
}

TEST(RadialMaps, SubExpNormalizationAndContinuity) {
  const auto m = RadialMap::sub_exp_example(1, 0.1);
  EXPECT_NEAR(m.eta(1.0), 1.0, 1e-15);
  EXPECT_NEAR(m.log_eta_at_log(1 - 1e-12), m.log_eta_at_log(1 + 1e-12), 1e-10);
  EXPECT_NEAR(m.log_slope_at_log(1 - 1e-12), m.log_slope_at_log(1 + 1e-12), 1e-10);
  EXPECT_THROW(RadialMap::sub_exp_example(1, -1), Error);
}

TEST(RadialMaps, TabulatedProfile) {
  std::vector<std::pair<double, double>> s;
  for (double r : {0.001, 0.01, 0.1, 0.5}) s.push_back({r, 3 * r * r});
  const auto m = RadialMap::tabulated(s);
  EXPECT_NEAR(m.eta(1.0), 1.0, 1e-12);
  EXPECT_NEAR(distortion(m)(0.05), 2.0, 1e-12);
  s[1].second = s[0].second;
  try {
    distortion(RadialMap::tabulated(s))(0.005);
    FAIL() << "flat segment accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Singularity);
  }
}

TEST(Integrability, ConstantDistortionIsIntegrable) {
  const auto v = integrability_class(distortion(RadialMap::power_stretch(4)), Gauge::exponential(3));
  EXPECT_EQ(v.verdict, Integrability::Integrable);
  EXPECT_NEAR(v.shell_exponent, 2.0, 1e-6);
}

TEST(Integrability, SubExpExampleFlipsAtZero) {
  const double p = 1;
  const Gauge psi = Gauge::sub_exponential_log(p, 1, 1);
  for (double eps : {0.1, 0.5, 1.0, -0.1, -0.3}) {
    const auto v = integrability_class(distortion(RadialMap::sub_exp_example(p, eps)), psi);
    EXPECT_EQ(v.verdict, eps > 0 ? Integrability::Integrable : Integrability::Divergent) << eps;
    EXPECT_NEAR(v.shell_exponent, 2 - 2 * p / (p + eps), 0.05) << eps;
    EXPECT_NEAR(v.analytic_shell_exponent, 2 - 2 * p / (p + eps), 1e-15);
    EXPECT_EQ(v.critical_eps, 0.0);
  }
}

TEST(Comparator, PowerStretchAndIdentityHold) {
  auto rep = continuity_comparator(RadialMap::power_stretch(2.5), ContinuityBound::power_lower(2.5, 0.1));
  EXPECT_TRUE(rep.holds_on_grid);
  EXPECT_GE(rep.log_best_c0, 0.0);
  rep = continuity_comparator(RadialMap::identity(), ContinuityBound::power_lower(1, 0.3));
  EXPECT_TRUE(rep.holds_on_grid);
}

TEST(Comparator, SubExpExampleFallsBelowSubExpBound) {
  const auto m = RadialMap::sub_exp_example(1, 0.1);
  const auto b = ContinuityBound::sub_exp_lower(1.5);
  const auto rep = continuity_comparator(m, b);
  EXPECT_FALSE(rep.holds_on_grid);
  EXPECT_EQ(rep.violations, rep.grid_points);
  ASSERT_TRUE(std::isfinite(rep.crossing_log_inv));
  const double L = rep.crossing_log_inv;
  EXPECT_NEAR(m.log_eta_at_log(L), b.log_value_at_log(L), 1e-9);
  EXPECT_LT(m.log_eta_at_log(L + 1), b.log_value_at_log(L + 1));
}

TEST(LowerExponent, ValuesAndMonotonicity) {
  EXPECT_NEAR(lower_exponent_bound_log(1, 1, 1, 100), 2 * std::exp(0.01), 1e-14);
  double prev = INFINITY;
  for (double ell : {2.0, 10.0, 100.0, 1e6}) {
    const double v = lower_exponent_bound(1.5, 2, 0.7, ell);
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 3.0);
    prev = v;
  }
  EXPECT_THROW(lower_exponent_bound(1, 1, 1, 1.5), Error);
}

TEST(Winding, SpiralAndRadial) {
  EXPECT_NEAR(winding(RadialMap::identity(2), 0.4, 1e-8), 2 * std::log(1e8), 1e-9);
  EXPECT_NEAR(winding(RadialMap::identity(1), 0, std::exp(-10.0)), 10.0, 1e-9);
  EXPECT_EQ(winding(RadialMap::power_stretch(3), 1.0, 1e-5), 0.0);
  EXPECT_NEAR(winding_max(RadialMap::identity(0.5), 1e-3), 0.5 * std::log(1e3), 1e-9);
}

TEST(Winding, Additive) {
  const auto m = RadialMap::power_stretch(2, 3);
  const double a = winding(m, 1.1, 1e-2), b = winding(m, 1.1, 1e-7, 1e-2), c = winding(m, 1.1, 1e-7);
  EXPECT_NEAR(a + b, c, 1e-9);
}

TEST(Rotation, SpiralPassesAndInconsistentKRejected) {
  const double K1 = (3 + std::sqrt(5.0)) / 2;
  auto rep = rotation_bound_check(RadialMap::identity(1), K1, 1);
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.within_benchmark);
  EXPECT_NEAR(rep.rows.front().benchmark / rep.rows.front().k, std::sqrt(5.0), 1e-12);
  EXPECT_TRUE(rotation_bound_check(RadialMap::power_stretch(2), 2, 0.1).pass);
  try {
    rotation_bound_check(RadialMap::identity(5), 1, 1);
    FAIL() << "inconsistent K accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentK);
  }
}
