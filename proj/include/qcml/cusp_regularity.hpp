#pragma once

#include <vector>

#include "qcml/finite_distortion_maps.hpp"

namespace qcml {

// Phi(x) = x^a log^q(e + x), a >= 1.  Construction samples convexity and
// monotonicity on [1e-6, 1e12] and rejects weights that fail.
struct WeightFunction {
  double a = 2;
  double q = 0;

  static WeightFunction power_log(double a, double q);
  double log_value(double x) const;
  // log Phi(exp(log_x)), for arguments beyond double range.
  double log_value_at_log(double log_x) const;
  double value(double x) const;
  // lambda^a (1 + log lambda)^{max(q, 0)} 2^{|q|}.
  double doubling_constant(double lambda) const;
};

// psi_c(t) = Cc / log^p(1/t) on (0, 1/e).
struct ContinuityGauge {
  double p = 1;
  double Cc = 1;

  static ContinuityGauge log_power(double p, double Cc = 1);
  double value(double t) const;
  double derivative(double t) const;
  // log psi_c'(e^{-L}).
  double log_derivative_at_log(double L) const;
};

struct CuspIntegralReport {
  double partial = 0;      // 2 pi int_{t_floor}^{1/e} Phi(psi'(t)) t dt
  double log_partial = 0;
  Integrability verdict = Integrability::Integrable;
  double tail_exponent = 0;  // d log(shell term) / d log k at the farthest probe
  double probe_k = 0;
  std::vector<double> log_shell_sums;  // shells t in [e^{-k-1}, e^{-k}], k = 1..horizon
};

CuspIntegralReport phi_psiprime_integral(const WeightFunction& phi, const ContinuityGauge& gauge, double t_floor,
                                         int horizon = 5000);

double critical_exponent(double p);

struct CriticalSearch {
  double analytic = 0;
  double estimate = 0;  // midpoint of the final bracket
  double lo = 0, hi = 0;
  int steps = 0;
};

// Bisects q between an Integrable and a Divergent verdict for Phi = x^a log^q(e + x).
CriticalSearch critical_exponent_search(double p, double a = 2, double Cc = 1, double tol = 0.01);

struct DoublingRow {
  double lambda = 1;
  double observed = 1;  // max over the grid of Phi(lambda x) / Phi(x)
  double argmax = 0;
  double analytic = 1;
  bool certified = false;
};

std::vector<DoublingRow> doubling_check(const WeightFunction& phi, const std::vector<double>& lambdas,
                                        std::size_t points = 4001);

}  // namespace qcml
