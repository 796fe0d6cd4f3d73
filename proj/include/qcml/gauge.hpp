#pragma once

#include <utility>
#include <vector>

namespace qcml {

enum class GaugeKind { Exponential, PowerExponential, SubExponentialLog, PowerLp, Tabulated };

const char* gauge_kind_name(GaugeKind kind) noexcept;

// Convex increasing gauge psi on [1, inf) together with g = log psi.
//
// SubExponentialLog is g(x) = p x / (offset + log x)^beta.  Below the
// inflection point x1 = exp(beta + 1 - offset) g is replaced by its tangent
// line, which keeps psi increasing and convex on all of [1, inf).
class Gauge {
 public:
  static Gauge exponential(double p);
  static Gauge power_exponential(double p, double alpha);
  static Gauge sub_exponential_log(double p, double beta, double offset = 0.0);
  static Gauge power_lp(double p);
  static Gauge tabulated(std::vector<std::pair<double, double>> samples);

  GaugeKind kind() const { return kind_; }
  double p() const { return p_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double offset() const { return offset_; }
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }

  // Interval on which eval is defined: [1, inf) or the sample hull.
  double domain_lo() const;
  double domain_hi() const;
  // Kinks of the log-gauge (sample abscissae for tabulated gauges).
  std::vector<double> kinks() const;

  double eval(double x) const;
  double log_gauge(double x) const;
  double log_gauge_derivative(double x) const;
  double log_gauge_second_derivative(double x) const;

  // x >= 1 with eval(x) = y.
  double inverse(double y) const;
  // x >= 1 with log_gauge(x) = log_y.
  double inverse_log(double log_y) const;
  // log of inverse_log, usable when the preimage itself overflows.
  double log_inverse_log(double log_y) const;

 private:
  Gauge() = default;
  void check_domain(double x) const;
  double sub_g(double x) const;
  double sub_dg(double x) const;
  double sub_d2g(double x) const;

  GaugeKind kind_ = GaugeKind::Exponential;
  double p_ = 1, alpha_ = 1, beta_ = 1, offset_ = 0;
  double x1_ = 1, g1_ = 0, dg1_ = 0;  // SubExponentialLog tangent junction
  std::vector<std::pair<double, double>> samples_;
  std::vector<double> tab_g_;
};

enum class Cavitation { Divergent, Convergent };

struct CavitationReport {
  Cavitation verdict = Cavitation::Divergent;
  bool analytic = false;
  double integral = 0;               // finite value of the integral when convergent, +inf otherwise
  std::vector<double> horizons;      // T_k
  std::vector<double> increments;    // integral over [T_k, T_{k+1}]
  std::vector<double> ratios;        // increments[k+1] / increments[k]
};

// Decides divergence of the integral of log psi(x) / x^2 over [2, inf).
CavitationReport cavitation_test(const Gauge& psi);

}  // namespace qcml
