#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qcml/gauge.hpp"

namespace qcml {

enum class RadialKind { PowerStretch, SubExpExample, Tabulated };
const char* radial_kind_name(RadialKind kind) noexcept;

// f(z) = (z/|z|) eta(|z|) exp(i gamma log|z|), normalized so that eta(1) = 1.
//
// SubExpExample uses eta(r) = exp(-log^2(1/r) log log(1/r) / (p + eps)) for
// r <= 1/e and the affine continuation of that profile on [1/e, 1].
// Tabulated profiles interpolate log eta linearly in log r and extend the end
// slopes past the sample range.
class RadialMap {
 public:
  static RadialMap power_stretch(double K, double gamma = 0);
  static RadialMap identity(double gamma = 0) { return power_stretch(1, gamma); }
  static RadialMap sub_exp_example(double p, double eps, double gamma = 0);
  static RadialMap tabulated(std::vector<std::pair<double, double>> samples, double gamma = 0);

  RadialKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double K() const { return K_; }
  double p() const { return p_; }
  double eps() const { return eps_; }
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }

  // Profile in the variable L = log(1/r) > 0.
  double log_eta_at_log(double L) const;
  // r eta'(r) / eta(r).
  double log_slope_at_log(double L) const;

  double eta(double r) const;
  double log_eta(double r) const { return log_eta_at_log(-std::log(r)); }
  double log_slope(double r) const { return log_slope_at_log(-std::log(r)); }

  std::complex<double> operator()(double x, double y) const;
  // f(z) / |f(z)|, defined even where eta underflows.
  std::complex<double> direction(double x, double y) const;
  // Same at z = e^{-L} e^{i theta}.
  std::complex<double> direction_at_log(double theta, double L) const;

 private:
  RadialMap() = default;
  RadialKind kind_ = RadialKind::PowerStretch;
  double gamma_ = 0;
  double K_ = 1;
  double p_ = 1, eps_ = 0, q_ = 1, log_eta1_ = 0;  // SubExpExample: q = p + eps
  std::vector<std::pair<double, double>> samples_;  // (r, eta) as given
  std::vector<double> tab_L_, tab_log_eta_;        // increasing L
};

// sigma_max / sigma_min of the derivative of f for log slope rho and spiral rate gamma.
double distortion_from_slope(double rho, double gamma);

class DistortionProfile {
 public:
  explicit DistortionProfile(RadialMap map) : map_(std::move(map)) {}
  const RadialMap& map() const { return map_; }
  double operator()(double r) const { return at_log(-std::log(r)); }
  double at_log(double L) const;

 private:
  RadialMap map_;
};

DistortionProfile distortion(const RadialMap& map);

enum class Integrability { Integrable, Divergent };
const char* integrability_name(Integrability v) noexcept;

struct IntegrabilityVerdict {
  std::string gauge;
  Integrability verdict = Integrability::Integrable;
  std::vector<double> log_partial_sums;  // log of 2 pi times the shell sums up to k
  // Decay exponent e of the shell terms, T_k ~ 2^{-e k}, at the farthest probe.
  double shell_exponent = 0;
  double probe_k = 0;
  // Analytic exponent and critical eps for SubExpExample against x / (1 + log x)-type gauges.
  double analytic_shell_exponent = std::numeric_limits<double>::quiet_NaN();
  double critical_eps = std::numeric_limits<double>::quiet_NaN();
};

// Convergence of 2 pi * int_0^1 psi(K_f(r)) r dr over shells [2^{-k-1}, 2^{-k}].
IntegrabilityVerdict integrability_class(const DistortionProfile& profile, const Gauge& psi, int direct_shells = 2000);

struct ContinuityBound {
  enum class Kind { PowerLower, SubExpLower } kind = Kind::PowerLower;
  double K = 1, eps = 0.1;  // PowerLower: r^{2K(1+eps)}
  double c = 1.5;           // SubExpLower: exp(-log^c(1/r))

  static ContinuityBound power_lower(double K, double eps);
  static ContinuityBound sub_exp_lower(double c);
  double log_value_at_log(double L) const;
};

struct ComparatorReport {
  bool holds_on_grid = false;  // eta(r) >= bound(r) at every grid radius
  double first_violation = std::numeric_limits<double>::quiet_NaN();  // largest violating r
  double log_best_c0 = 0;      // log of min eta / bound over the grid
  std::size_t grid_points = 0;
  std::size_t violations = 0;
  // log(1/r) where eta meets the bound, searched on (r_lo, 1); NaN without a sign change.
  double crossing_log_inv = std::numeric_limits<double>::quiet_NaN();
};

ComparatorReport continuity_comparator(const RadialMap& map, const ContinuityBound& bound, double r_lo = 1e-12,
                                       double r_hi = 1e-1, std::size_t points = 2001);

// 2K exp(c / (p log(ell + 1))).
double lower_exponent_bound(double K, double p, double c, double ell);
double lower_exponent_bound_log(double K, double p, double c, double log_ell_plus_1);

// Unwrapped change of arg f(t e^{i theta}) as t decreases from r_outer to r_inner,
// with the sign chosen so that gamma > 0 gives a positive value.
double winding(const RadialMap& map, double theta, double r_inner, double r_outer = 1.0);
// Same with radii given as L = log(1/r).
double winding_log(const RadialMap& map, double theta, double L_inner, double L_outer = 0.0);
double winding_max(const RadialMap& map, double r, int directions = 64);

struct RotationRow {
  int k = 0;  // r = e^{-k}
  double winding = 0;
  double bound = 0;      // c K k
  double benchmark = 0;  // (K - 1/K) k
};

struct RotationReport {
  double K = 1, c = 1;
  double measured_K = 1;
  bool pass = false;
  bool within_benchmark = false;
  std::vector<RotationRow> rows;
};

RotationReport rotation_bound_check(const RadialMap& map, double K, double c, int k_lo = 5, int k_hi = 40);

}  // namespace qcml
