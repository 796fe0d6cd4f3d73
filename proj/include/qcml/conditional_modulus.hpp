#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qcml/gauge.hpp"

namespace qcml {

// Annulus {e^{-n} < |x| < e^{-m}}.
struct ShellRange {
  int m = 0;
  int n = 1;
};

// Annulus {r < |x| < R} stored in log scale: log_inv_r = log(1/r) > log_inv_R = log(1/R) >= 0.
struct AnnulusSpec {
  double log_inv_r = 1;
  double log_inv_R = 0;

  static AnnulusSpec from_radii(double r, double R);
  static AnnulusSpec from_log(double log_inv_r, double log_inv_R);
  double r() const;
  double R() const;
  // (ceil log(1/R), floor log(1/r)).
  ShellRange shells() const;
};

struct DistortionBudget {
  double I = 0;
  explicit DistortionBudget(double I_);
  double I0() const;
};

// Optimal shell profile.  Shells j = m+1..n; a capped shell has a_j = 1,
// K_j = 1 and consumes no budget (b_j = 0).
struct ShellProfile {
  int m = 0, n = 1;
  double scale = 1;              // e^0 for the e^{2j} side, e^2 for the e^{2(j+1)} side
  std::vector<double> b, a, K;
  std::vector<bool> capped;
  int first_active = 0;          // shells >= first_active are uncapped
  double objective = 0;          // sum of a_j
  double log_multiplier = 0;     // log of the budget multiplier
  double stationarity_residual = 0;
  double budget_residual = 0;    // |sum b_j - 1|
};

ShellProfile extremal_profile(const Gauge& psi, const DistortionBudget& budget, const ShellRange& shells,
                              double scale = 1.0);

// sum_j min(1, 1 / psi^{-1}(scale * I0 * e^{2j} * b_j)) for a given b.
double shell_objective(const Gauge& psi, const DistortionBudget& budget, const ShellRange& shells,
                       const std::vector<double>& b, double scale = 1.0);

enum class BracketMethod { DiscreteSandwich, Asymptotic, ClosedForm, RadialExact, GridRichardson, GridSingle };
const char* bracket_method_name(BracketMethod m) noexcept;

struct ModulusBracket {
  double lower = 0;
  double upper = 0;
  BracketMethod method = BracketMethod::DiscreteSandwich;
  double lower_inv = 0;  // 2*pi / upper
  double upper_inv = 0;  // 2*pi / lower
};

ModulusBracket conditional_modulus_bracket(const Gauge& psi, const DistortionBudget& budget, const ShellRange& shells);

// Radial distortion K given as a function of t = log(1/u); breaks are known kinks in t.
struct RadialProfile {
  std::function<double(double)> K_of_t;
  std::vector<double> breaks;
};

double radial_weighted_modulus(const RadialProfile& K, const AnnulusSpec& annulus);

// Piecewise-constant profile taking K_j on t in (j, j+1).
RadialProfile shell_profile_as_radial(const ShellProfile& profile);

// Integral of min(1, 1 / g^{-1}(2t)) over t in [log(1/R), log(1/r)].
double asymptotic_inverse_modulus(const Gauge& psi, const AnnulusSpec& annulus);

// 3 * integral over [g^{-1}(2m - 2 log(2m) + a), inf) of (1 + log(g(u) - a)) / u^2,
// a = floor(log I0): explicit bound on the sandwich-to-sum discrepancy for R = e^{-m}.
double asymptotic_error_bound(const Gauge& psi, const DistortionBudget& budget, int m);

// Leading-order closed forms in the inverse scale; throws UnsupportedKindError.
double closed_form_inverse_modulus(const Gauge& psi, const AnnulusSpec& annulus);
double closed_form_modulus(const Gauge& psi, const AnnulusSpec& annulus);

}  // namespace qcml
