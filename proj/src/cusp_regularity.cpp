#include "qcml/cusp_regularity.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qcml/errors.hpp"
#include "qcml/numerics.hpp"

namespace qcml {

namespace {
constexpr double kE = std::numbers::e;

// log log(e + exp(u)).
double log_log_e_plus_exp(double u) {
  const double l = u > 0 ? u + std::log1p(kE * std::exp(-u)) : std::log(kE + std::exp(u));
  return std::log(l);
}
}  // namespace

WeightFunction WeightFunction::power_log(double a, double q) {
  require(std::isfinite(a) && a >= 1, ErrorKind::Domain, "weight exponent a must be >= 1");
  require(std::isfinite(q), ErrorKind::Domain, "weight log power q must be finite");
  WeightFunction w;
  w.a = a;
  w.q = q;
  constexpr int kN = 2000;
  constexpr double kH = 1e-3;
  for (int i = 0; i <= kN; ++i) {
    const double x = std::pow(10.0, -6 + 18.0 * i / kN);
    const double f0 = w.value(x), fm = w.value(x * (1 - kH)), fp = w.value(x * (1 + kH));
    require(fp > f0 && f0 > fm, ErrorKind::Domain, "weight is not increasing at x = " + std::to_string(x));
    const double d2 = (fp - 2 * f0 + fm) / (f0 * kH * kH);
    require(d2 >= -1e-7, ErrorKind::Domain, "weight is not convex at x = " + std::to_string(x));
  }
  return w;
}

double WeightFunction::log_value(double x) const { return a * std::log(x) + q * std::log(std::log(kE + x)); }

double WeightFunction::log_value_at_log(double log_x) const { return a * log_x + q * log_log_e_plus_exp(log_x); }

double WeightFunction::value(double x) const { return std::pow(x, a) * std::pow(std::log(kE + x), q); }

double WeightFunction::doubling_constant(double lambda) const {
  require(lambda >= 1, ErrorKind::Domain, "lambda must be >= 1");
  return std::pow(lambda, a) * std::pow(1 + std::log(lambda), std::max(q, 0.0)) * std::pow(2.0, std::fabs(q));
}

ContinuityGauge ContinuityGauge::log_power(double p, double Cc) {
  require(std::isfinite(p) && p > 0, ErrorKind::Domain, "gauge power p must be > 0");
  require(std::isfinite(Cc) && Cc > 0, ErrorKind::Domain, "gauge constant must be > 0");
  return ContinuityGauge{p, Cc};
}

double ContinuityGauge::value(double t) const {
  require(t > 0 && t < 1 / kE, ErrorKind::Domain, "t must lie in (0, 1/e)");
  return Cc / std::pow(-std::log(t), p);
}

double ContinuityGauge::derivative(double t) const {
  require(t > 0 && t < 1 / kE, ErrorKind::Domain, "t must lie in (0, 1/e)");
  return std::exp(log_derivative_at_log(-std::log(t)));
}

double ContinuityGauge::log_derivative_at_log(double L) const {
  return std::log(Cc * p) + L - (p + 1) * std::log(L);
}

CuspIntegralReport phi_psiprime_integral(const WeightFunction& phi, const ContinuityGauge& gauge, double t_floor,
                                         int horizon) {
  require(t_floor > 0 && t_floor < 1 / kE, ErrorKind::Domain, "t_floor must lie in (0, 1/e)");
  require(horizon >= 8, ErrorKind::Domain, "shell horizon too small");
  const double log2pi = std::log(2 * std::numbers::pi);
  // t = e^{-L}: Phi(psi'(t)) t dt = exp(log Phi(psi') - 2L) dL.
  // The a L and -2L parts are combined first; they cancel for a = 2.
  auto h = [&](double L) {
    const double excess = std::log(gauge.Cc * gauge.p) - (gauge.p + 1) * std::log(L);
    return phi.a * excess + (phi.a - 2) * L + phi.q * log_log_e_plus_exp(L + excess);
  };
  auto log_term = [&](double k) { return log2pi + log_shell_integral(h, k, 1.0); };

  // Shell index j = k - 1 so the tail classifier starts at 0.
  const TailReport tail = classify_tail([&](double j) { return log_term(j + 1); }, 0, horizon - 1, 1e290);

  CuspIntegralReport rep;
  rep.verdict = tail.verdict == TailVerdict::Convergent ? Integrability::Integrable : Integrability::Divergent;
  rep.tail_exponent = tail.power_slope;
  rep.probe_k = tail.probes.back().k + 1;
  rep.log_shell_sums = tail.log_partial_sums;

  const double L_floor = -std::log(t_floor);
  double acc = -INFINITY;
  double k = 1;
  for (; k + 1 <= L_floor; k += 1) acc = log_add_exp(acc, log_term(k));
  if (L_floor > k) acc = log_add_exp(acc, log2pi + log_integrate_exp(h, k, L_floor, 1e-10));
  rep.log_partial = acc;
  rep.partial = std::exp(acc);
  return rep;
}

double critical_exponent(double p) {
  require(std::isfinite(p) && p > 0, ErrorKind::Domain, "p must be > 0");
  return 2 * p + 1;
}

CriticalSearch critical_exponent_search(double p, double a, double Cc, double tol) {
  CriticalSearch s;
  s.analytic = critical_exponent(p);
  const ContinuityGauge g = ContinuityGauge::log_power(p, Cc);
  auto integrable = [&](double q) {
    return phi_psiprime_integral(WeightFunction::power_log(a, q), g, 1e-3).verdict == Integrability::Integrable;
  };
  // Initial bracket around 2p + 1.
  s.lo = -1;
  s.hi = 4 * p + 4;
  require(integrable(s.lo) && !integrable(s.hi), ErrorKind::Solver, "verdicts do not bracket the critical exponent");
  while (s.hi - s.lo > tol) {
    const double mid = 0.5 * (s.lo + s.hi);
    bool ok;
    try {
      ok = integrable(mid);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Undecidable) throw;
      break;
    }
    (ok ? s.lo : s.hi) = mid;
    ++s.steps;
  }
  s.estimate = 0.5 * (s.lo + s.hi);
  return s;
}

std::vector<DoublingRow> doubling_check(const WeightFunction& phi, const std::vector<double>& lambdas,
                                        std::size_t points) {
  require(points >= 2, ErrorKind::Domain, "need at least 2 grid points");
  std::vector<DoublingRow> rows;
  for (double lambda : lambdas) {
    require(std::isfinite(lambda) && lambda >= 1, ErrorKind::Domain, "lambda must be >= 1");
    DoublingRow row;
    row.lambda = lambda;
    row.analytic = phi.doubling_constant(lambda);
    row.observed = 0;
    const double ll = std::log(lambda);
    for (std::size_t i = 0; i < points; ++i) {
      const double lx = std::log(1e-6) + (std::log(1e12) - std::log(1e-6)) * double(i) / double(points - 1);
      const double ratio = std::exp(phi.log_value_at_log(lx + ll) - phi.log_value_at_log(lx));
      if (ratio > row.observed) {
        row.observed = ratio;
        row.argmax = std::exp(lx);
      }
    }
    row.certified = row.observed <= row.analytic * (1 + 1e-12);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qcml
