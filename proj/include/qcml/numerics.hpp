#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qcml {

using RealFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (7/15) quadrature on [a, b]; throws IntegrationError
// when the error estimate stays above rel_tol relative to the integral's L1 norm.
double integrate(const RealFn& f, double a, double b, double rel_tol = 1e-10);

// Same, splitting at interior breakpoints (ignored when outside (a, b)).
double integrate(const RealFn& f, double a, double b, const std::vector<double>& breaks,
                 double rel_tol = 1e-10);

// log of the integral of exp(h) over [a, b], computed with a max-shift.
double log_integrate_exp(const RealFn& h, double a, double b, double rel_tol = 1e-10);

// log of the integral of exp(h) over [a, a + width] for a far from the origin:
// quadrature while a < 1e4, beyond that h is linearized about the midpoint
// because rounding in the abscissa exceeds the quadrature tolerance.
double log_shell_integral(const RealFn& h, double a, double width);

double log_add_exp(double x, double y);

// Root of a monotone function with f(lo), f(hi) of opposite sign (TOMS 748).
double solve_bracketed(const RealFn& f, double lo, double hi, double abs_tol = 0.0);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// Worker count honouring QCML_THREADS.
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

enum class TailVerdict { Convergent, Divergent };

struct TailProbe {
  double k = 0;
  double log_term = 0;
  double power_slope = 0;   // d log(term) / d log k
  double bertrand = 0;      // (power_slope + 1) * log k
  double rate = 0;          // -d log(term) / dk
};

struct TailReport {
  TailVerdict verdict = TailVerdict::Convergent;
  std::vector<double> log_partial_sums;  // index k = partial sum of terms 0..k
  std::vector<TailProbe> probes;         // geometric horizons beyond the direct range
  double power_slope = 0;
  double rate = 0;
};

// Classifies a nonnegative series sum_k exp(log_term(k)).  Terms 0..direct are
// summed exactly; the tail is probed at k = direct * 2^j up to k_max and
// classified by Bertrand's test: convergent iff (s + 1) log k < -1, where s is
// the local power slope.  log_term must accept real k.
TailReport classify_tail(const RealFn& log_term, int first, int direct, double k_max);

}  // namespace qcml
