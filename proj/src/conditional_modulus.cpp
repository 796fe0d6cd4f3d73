#include "qcml/conditional_modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qcml/errors.hpp"
#include "qcml/numerics.hpp"

namespace qcml {

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

AnnulusSpec AnnulusSpec::from_radii(double r, double R) {
  require(r > 0 && r < R && R <= 1, ErrorKind::Domain, "annulus needs 0 < r < R <= 1");
  return from_log(-std::log(r), -std::log(R));
}

AnnulusSpec AnnulusSpec::from_log(double log_inv_r, double log_inv_R) {
  require(std::isfinite(log_inv_r) && log_inv_R >= 0 && log_inv_r > log_inv_R, ErrorKind::Domain,
          "annulus needs log(1/r) > log(1/R) >= 0");
  AnnulusSpec a;
  a.log_inv_r = log_inv_r;
  a.log_inv_R = log_inv_R;
  return a;
}

double AnnulusSpec::r() const { return std::exp(-log_inv_r); }
double AnnulusSpec::R() const { return std::exp(-log_inv_R); }

ShellRange AnnulusSpec::shells() const {
  ShellRange s;
  s.m = static_cast<int>(std::ceil(log_inv_R));
  s.n = static_cast<int>(std::floor(log_inv_r));
  require(s.n > s.m, ErrorKind::Domain, "annulus too thin to contain a full shell");
  return s;
}

DistortionBudget::DistortionBudget(double I_) : I(I_) {
  require(std::isfinite(I_) && I_ > 0, ErrorKind::Domain, "budget I must be positive");
}

double DistortionBudget::I0() const { return I / kTwoPi; }

const char* bracket_method_name(BracketMethod m) noexcept {
  switch (m) {
    case BracketMethod::DiscreteSandwich: return "DiscreteSandwich";
    case BracketMethod::Asymptotic: return "Asymptotic";
    case BracketMethod::ClosedForm: return "ClosedForm";
    case BracketMethod::RadialExact: return "RadialExact";
    case BracketMethod::GridRichardson: return "GridRichardson";
    case BracketMethod::GridSingle: return "GridSingle";
  }
  return "?";
}

namespace {

void check_shells(const ShellRange& s) {
  require(s.m >= 0 && s.n > s.m, ErrorKind::Domain, "shell range needs 0 <= m < n");
}

// Solver for one side of the sandwich.  With s = log K, the stationarity
// condition K^2 psi'(K) = e^{2j} / mu reads log_h(s) = 2j - lambda.
class ShellSolver {
 public:
  ShellSolver(const Gauge& psi, double log_budget) : psi_(psi), log_budget_(log_budget) {
    log_h0_ = log_h(0.0);
  }

  double log_h(double s) const {
    const double x = std::exp(s);
    return 2 * s + std::log(psi_.log_gauge_derivative(x)) + psi_.log_gauge(x);
  }

  double dlog_h(double s) const {
    const double x = std::exp(s);
    const double g1 = psi_.log_gauge_derivative(x);
    return 2 + x * psi_.log_gauge_second_derivative(x) / g1 + x * g1;
  }

  double log_h0() const { return log_h0_; }

  // s >= 0 with log_h(s) = tau (0 when tau <= log_h(0)).
  double solve_s(double tau, double guess) const {
    if (tau <= log_h0_) return 0.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double s = std::max(guess, 0.0);
    if (!(s > 0)) s = std::max(1e-3, std::log(std::max(tau, 1.0)));
    const double tol = 1e-14 * std::max(1.0, std::fabs(tau));
    for (int it = 0; it < 200; ++it) {
      const double F = log_h(s) - tau;
      if (std::fabs(F) <= tol) return s;
      if (F < 0)
        lo = s;
      else
        hi = s;
      const double d = dlog_h(s);
      double next = s - F / d;
      const bool bad = !std::isfinite(next) || !(d > 0) || next <= lo || next >= hi;
      if (bad) next = std::isfinite(hi) ? 0.5 * (lo + hi) : std::max(2 * s, s + 1);
      if (std::isfinite(hi) && hi - lo <= 1e-15 * std::max(1.0, hi)) return 0.5 * (lo + hi);
      s = next;
    }
    return s;
  }

  // log of sum_{j >= J} e^{-2j} psi(K_j(lambda)).
  double log_spend(int J, int n, double lambda, std::vector<double>& s) const {
    double acc = kNegInf;
    for (int j = J; j <= n; ++j) {
      double& sj = s[static_cast<std::size_t>(j - J)];
      sj = solve_s(2.0 * j - lambda, sj);
      acc = log_add_exp(acc, psi_.log_gauge(std::exp(sj)) - 2.0 * j);
    }
    return acc;
  }

  const Gauge& psi() const { return psi_; }
  double log_budget() const { return log_budget_; }

 private:
  const Gauge& psi_;
  double log_budget_;
  double log_h0_;
};

}  // namespace

ShellProfile extremal_profile(const Gauge& psi, const DistortionBudget& budget, const ShellRange& shells,
                              double scale) {
  check_shells(shells);
  require(scale > 0, ErrorKind::Domain, "scale must be positive");
  const int m = shells.m, n = shells.n;
  const double log_budget = std::log(budget.I0() * scale);
  ShellSolver solver(psi, log_budget);

  double best = std::numeric_limits<double>::infinity();
  int best_J = -1;
  double best_lambda = 0;
  std::vector<double> best_s;
  double lambda_warm = std::numeric_limits<double>::quiet_NaN();

  for (int J = m + 1; J <= n; ++J) {
    if (J - m - 1 >= best) break;
    const int count = n - J + 1;
    std::vector<double> s(static_cast<std::size_t>(count), 0.0);
    // lambda_J: multiplier at which shell J sits exactly at K = 1.
    const double lambda_J = 2.0 * J - solver.log_h0();
    if (solver.log_spend(J, n, lambda_J, s) > log_budget) continue;
    auto F = [&](double lam) { return solver.log_spend(J, n, lam, s) - log_budget; };
    double step = std::isfinite(lambda_warm) && lambda_warm < lambda_J ? std::max(1.0, lambda_J - lambda_warm) : 1.0;
    double lo = lambda_J - step;
    while (F(lo) < 0) {
      step *= 2;
      lo = lambda_J - step;
      if (step > 1e6) fail(ErrorKind::Solver, "multiplier search failed to bracket the budget");
    }
    const double lambda = solve_bracketed(F, lo, lambda_J, 1e-13);
    solver.log_spend(J, n, lambda, s);
    double value = J - m - 1;
    for (double sj : s) value += std::exp(-sj);
    lambda_warm = lambda;
    if (value < best) {
      best = value;
      best_J = J;
      best_lambda = lambda;
      best_s = s;
    }
  }
  if (best_J < 0) fail(ErrorKind::Solver, "budget too small: every shell saturates the a_j = 1 cap");

  ShellProfile prof;
  prof.m = m;
  prof.n = n;
  prof.scale = scale;
  prof.first_active = best_J;
  prof.log_multiplier = best_lambda;
  prof.objective = 0;
  double bsum = 0, resid = 0;
  for (int j = m + 1; j <= n; ++j) {
    if (j < best_J) {
      prof.b.push_back(0.0);
      prof.a.push_back(1.0);
      prof.K.push_back(1.0);
      prof.capped.push_back(true);
    } else {
      const double sj = best_s[static_cast<std::size_t>(j - best_J)];
      const double K = std::exp(sj);
      const double bj = std::exp(psi.log_gauge(K) - 2.0 * j - log_budget);
      prof.b.push_back(bj);
      prof.a.push_back(1.0 / K);
      prof.K.push_back(K);
      prof.capped.push_back(false);
      bsum += bj;
      resid = std::max(resid, std::fabs(std::expm1(solver.log_h(sj) - (2.0 * j - best_lambda))));
    }
    prof.objective += prof.a.back();
  }
  prof.stationarity_residual = resid;
  prof.budget_residual = std::fabs(bsum - 1.0);
  return prof;
}

double shell_objective(const Gauge& psi, const DistortionBudget& budget, const ShellRange& shells,
                       const std::vector<double>& b, double scale) {
  check_shells(shells);
  require(b.size() == static_cast<std::size_t>(shells.n - shells.m), ErrorKind::Domain, "b has wrong length");
  const double g1 = psi.log_gauge(1.0);
  const double log_budget = std::log(budget.I0() * scale);
  double total = 0;
  for (int j = shells.m + 1; j <= shells.n; ++j) {
    const double bj = b[static_cast<std::size_t>(j - shells.m - 1)];
    if (!(bj > 0)) {
      total += 1.0;
      continue;
    }
    const double Y = log_budget + 2.0 * j + std::log(bj);
    total += Y <= g1 ? 1.0 : std::min(1.0, std::exp(-psi.log_inverse_log(Y)));
  }
  return total;
}

ModulusBracket conditional_modulus_bracket(const Gauge& psi, const DistortionBudget& budget, const ShellRange& shells) {
  const ShellProfile hi = extremal_profile(psi, budget, shells, 1.0);
  const ShellProfile lo = extremal_profile(psi, budget, shells, std::exp(2.0));
  ModulusBracket br;
  br.method = BracketMethod::DiscreteSandwich;
  br.upper_inv = hi.objective;
  br.lower_inv = lo.objective;
  br.lower = kTwoPi / br.upper_inv;
  br.upper = kTwoPi / br.lower_inv;
  return br;
}

double radial_weighted_modulus(const RadialProfile& K, const AnnulusSpec& annulus) {
  require(static_cast<bool>(K.K_of_t), ErrorKind::Domain, "radial profile is empty");
  auto f = [&](double t) {
    const double k = K.K_of_t(t);
    if (!(k >= 1.0 - 1e-12) || !std::isfinite(k)) fail(ErrorKind::Domain, "radial distortion must be finite and >= 1");
    return 1.0 / k;
  };
  const double inv = integrate(f, annulus.log_inv_R, annulus.log_inv_r, K.breaks, 1e-10);
  return kTwoPi / inv;
}

RadialProfile shell_profile_as_radial(const ShellProfile& profile) {
  RadialProfile rp;
  std::vector<double> Ks = profile.K;
  const int m = profile.m;
  rp.K_of_t = [Ks, m](double t) {
    int j = static_cast<int>(std::floor(t));
    j = std::clamp(j, m + 1, m + static_cast<int>(Ks.size()));
    return Ks[static_cast<std::size_t>(j - m - 1)];
  };
  for (int j = profile.m + 1; j <= profile.n + 1; ++j) rp.breaks.push_back(j);
  return rp;
}

double asymptotic_inverse_modulus(const Gauge& psi, const AnnulusSpec& annulus) {
  const double a = annulus.log_inv_R, b = annulus.log_inv_r;
  const double t_cap = psi.log_gauge(1.0) / 2;  // below this, g^{-1}(2t) < 1 and the integrand is 1
  double total = 0;
  if (a < t_cap) total += std::min(b, t_cap) - a;
  const double lo = std::max(a, t_cap);
  if (lo >= b) return total;
  auto inv = [&](double t) { return std::exp(-psi.log_inverse_log(2 * t)); };
  if (lo > 0) {
    // t = e^tau spreads wide log-ranges evenly.
    auto f = [&](double tau) {
      const double t = std::exp(tau);
      return t * inv(t);
    };
    total += integrate(f, std::log(lo), std::log(b), 1e-11);
  } else {
    const double mid = std::min(1.0, b);
    total += integrate(inv, lo, mid, 1e-11);
    if (b > mid) {
      auto f = [&](double tau) {
        const double t = std::exp(tau);
        return t * inv(t);
      };
      total += integrate(f, std::log(mid), std::log(b), 1e-11);
    }
  }
  return total;
}

double asymptotic_error_bound(const Gauge& psi, const DistortionBudget& budget, int m) {
  require(m >= 1, ErrorKind::Domain, "error bound needs m >= 1");
  const double a = std::floor(std::log(budget.I0()));
  const double level = 2.0 * m - 2 * std::log(2.0 * m) + a;
  const double x0 = level <= psi.log_gauge(1.0) ? 1.0 : psi.inverse_log(level);
  // u = x0 e^w; the integrand decays like w e^{-w}, negligible beyond w = 80.
  auto f = [&](double w) {
    const double gu = psi.log_gauge(x0 * std::exp(w));
    return (1 + std::log(std::max(gu - a, 1.0))) * std::exp(-w) / x0;
  };
  return 3 * integrate(f, 0.0, 80.0, {1.0, 4.0, 16.0}, 1e-10);
}

double closed_form_inverse_modulus(const Gauge& psi, const AnnulusSpec& annulus) {
  const double Lr = annulus.log_inv_r, LR = annulus.log_inv_R;
  const double p = psi.p();
  switch (psi.kind()) {
    case GaugeKind::Exponential:
      require(LR > 0, ErrorKind::Domain, "closed form needs R < 1");
      return p / 2 * (std::log(Lr) - std::log(LR));
    case GaugeKind::PowerExponential: {
      const double al = psi.alpha();
      if (al == 1.0) {
        require(LR > 0, ErrorKind::Domain, "closed form needs R < 1");
        return p / 2 * (std::log(Lr) - std::log(LR));
      }
      const double e = (al - 1) / al;
      return std::pow(p / 2, 1 / al) * al / (al - 1) * (std::pow(Lr, e) - std::pow(LR, e));
    }
    case GaugeKind::SubExponentialLog: {
      require(LR > 1, ErrorKind::Domain, "closed form needs log(1/R) > 1");
      const double be = psi.beta();
      if (be == 1.0) return p / 2 * (std::log(std::log(Lr)) - std::log(std::log(LR)));
      return p / (2 * (1 - be)) * (std::pow(std::log(Lr), 1 - be) - std::pow(std::log(LR), 1 - be));
    }
    default: fail(ErrorKind::UnsupportedKind, std::string("no closed form for ") + gauge_kind_name(psi.kind()));
  }
}

double closed_form_modulus(const Gauge& psi, const AnnulusSpec& annulus) {
  return kTwoPi / closed_form_inverse_modulus(psi, annulus);
}

}  // namespace qcml
