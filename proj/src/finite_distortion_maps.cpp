#include "qcml/finite_distortion_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcml/errors.hpp"
#include "qcml/numerics.hpp"

namespace qcml {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

void check_gamma(double gamma) {
  require(std::isfinite(gamma) && gamma >= 0, ErrorKind::Domain, "spiral rate must be >= 0");
}

}  // namespace

const char* radial_kind_name(RadialKind kind) noexcept {
  switch (kind) {
    case RadialKind::PowerStretch: return "PowerStretch";
    case RadialKind::SubExpExample: return "SubExpExample";
    case RadialKind::Tabulated: return "Tabulated";
  }
  return "?";
}

const char* integrability_name(Integrability v) noexcept {
  return v == Integrability::Integrable ? "Integrable" : "Divergent";
}

RadialMap RadialMap::power_stretch(double K, double gamma) {
  require(std::isfinite(K) && K >= 1, ErrorKind::Domain, "PowerStretch needs K >= 1");
  check_gamma(gamma);
  RadialMap m;
  m.kind_ = RadialKind::PowerStretch;
  m.K_ = K;
  m.gamma_ = gamma;
  return m;
}

RadialMap RadialMap::sub_exp_example(double p, double eps, double gamma) {
  require(std::isfinite(p) && p > 0, ErrorKind::Domain, "p must be > 0");
  require(std::isfinite(eps) && eps > -p, ErrorKind::Domain, "eps must exceed -p");
  check_gamma(gamma);
  RadialMap m;
  m.kind_ = RadialKind::SubExpExample;
  m.p_ = p;
  m.eps_ = eps;
  m.q_ = p + eps;
  m.gamma_ = gamma;
  m.log_eta1_ = std::log1p((kE - 1) / m.q_);
  return m;
}

RadialMap RadialMap::tabulated(std::vector<std::pair<double, double>> samples, double gamma) {
  require(samples.size() >= 2, ErrorKind::Domain, "tabulated profile needs at least 2 samples");
  check_gamma(gamma);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto [r, e] = samples[i];
    require(std::isfinite(r) && r > 0 && std::isfinite(e) && e > 0, ErrorKind::Domain,
            "tabulated samples need r > 0 and eta > 0");
    if (i > 0) {
      require(r > samples[i - 1].first, ErrorKind::Domain, "tabulated radii must increase");
      require(e >= samples[i - 1].second, ErrorKind::Domain, "tabulated eta must be nondecreasing");
    }
  }
  RadialMap m;
  m.kind_ = RadialKind::Tabulated;
  m.gamma_ = gamma;
  m.samples_ = samples;
  for (auto it = samples.rbegin(); it != samples.rend(); ++it) {
    m.tab_L_.push_back(-std::log(it->first));
    m.tab_log_eta_.push_back(std::log(it->second));
  }
  const double at_one = m.log_eta_at_log(0.0);
  for (double& v : m.tab_log_eta_) v -= at_one;
  return m;
}

double RadialMap::log_eta_at_log(double L) const {
  switch (kind_) {
    case RadialKind::PowerStretch:
      return -K_ * L;
    case RadialKind::SubExpExample: {
      if (L >= 1) return -L * L * std::log(L) / q_ - log_eta1_;
      const double r = std::exp(-L);
      return std::log1p(kE / q_ * (r - 1 / kE)) - log_eta1_;
    }
    case RadialKind::Tabulated: {
      const std::size_t n = tab_L_.size();
      std::size_t i = std::upper_bound(tab_L_.begin(), tab_L_.end(), L) - tab_L_.begin();
      i = std::clamp<std::size_t>(i, 1, n - 1);
      const double t = (L - tab_L_[i - 1]) / (tab_L_[i] - tab_L_[i - 1]);
      return tab_log_eta_[i - 1] + t * (tab_log_eta_[i] - tab_log_eta_[i - 1]);
    }
  }
  return 0;
}

double RadialMap::log_slope_at_log(double L) const {
  double rho = 0;
  switch (kind_) {
    case RadialKind::PowerStretch:
      rho = K_;
      break;
    case RadialKind::SubExpExample:
      if (L >= 1) {
        rho = L * (2 * std::log(L) + 1) / q_;
      } else {
        const double r = std::exp(-L);
        rho = r * kE / q_ / (1 + kE / q_ * (r - 1 / kE));
      }
      break;
    case RadialKind::Tabulated: {
      const std::size_t n = tab_L_.size();
      std::size_t i = std::upper_bound(tab_L_.begin(), tab_L_.end(), L) - tab_L_.begin();
      i = std::clamp<std::size_t>(i, 1, n - 1);
      rho = -(tab_log_eta_[i] - tab_log_eta_[i - 1]) / (tab_L_[i] - tab_L_[i - 1]);
      break;
    }
  }
  if (!(rho > 0)) fail(ErrorKind::Singularity, "eta' vanishes at log(1/r) = " + std::to_string(L));
  return rho;
}

double RadialMap::eta(double r) const { return std::exp(log_eta(r)); }

std::complex<double> RadialMap::direction(double x, double y) const {
  const double r = std::hypot(x, y);
  require(r > 0, ErrorKind::Domain, "map evaluated at the origin");
  return std::complex<double>(x / r, y / r) * std::polar(1.0, gamma_ * std::log(r));
}

std::complex<double> RadialMap::direction_at_log(double theta, double L) const {
  return std::polar(1.0, theta - gamma_ * L);
}

std::complex<double> RadialMap::operator()(double x, double y) const {
  return direction(x, y) * eta(std::hypot(x, y));
}

double distortion_from_slope(double rho, double gamma) {
  // Derivative matrix in polar frames, divided by eta / r: [[rho, 0], [gamma, 1]].
  const double S = rho + (gamma * gamma + 1) / rho;
  const double Sm2 = (rho - 1) * ((rho - 1) / rho) + gamma * gamma / rho;
  return 0.5 * (S + std::sqrt(Sm2) * std::sqrt(S + 2));
}

double DistortionProfile::at_log(double L) const {
  return distortion_from_slope(map_.log_slope_at_log(L), map_.gamma());
}

DistortionProfile distortion(const RadialMap& map) { return DistortionProfile(map); }

IntegrabilityVerdict integrability_class(const DistortionProfile& profile, const Gauge& psi, int direct_shells) {
  require(direct_shells >= 8, ErrorKind::Domain, "shell horizon too small");
  const double ln2 = std::log(2.0);
  const double log2pi = std::log(2 * kPi);
  // Shell k covers L in [k ln2, (k + 1) ln2]; r dr = e^{-2L} dL.
  auto h = [&](double L) { return psi.log_gauge(profile.at_log(L)) - 2 * L; };
  auto log_term = [&](double k) { return log2pi + log_shell_integral(h, k * ln2, ln2); };
  const TailReport tail = classify_tail(log_term, 0, direct_shells, 1e290);

  IntegrabilityVerdict v;
  v.gauge = gauge_kind_name(psi.kind());
  v.verdict = tail.verdict == TailVerdict::Convergent ? Integrability::Integrable : Integrability::Divergent;
  v.log_partial_sums = tail.log_partial_sums;
  v.shell_exponent = tail.rate / ln2;
  v.probe_k = tail.probes.back().k;
  const RadialMap& m = profile.map();
  if (m.kind() == RadialKind::SubExpExample && m.gamma() == 0 && psi.kind() == GaugeKind::SubExponentialLog &&
      psi.beta() == 1) {
    v.analytic_shell_exponent = 2 - 2 * psi.p() / (m.p() + m.eps());
    v.critical_eps = psi.p() - m.p();
  }
  return v;
}

ContinuityBound ContinuityBound::power_lower(double K, double eps) {
  require(std::isfinite(K) && K >= 1, ErrorKind::Domain, "PowerLower needs K >= 1");
  require(std::isfinite(eps) && eps > 0, ErrorKind::Domain, "PowerLower needs eps > 0");
  ContinuityBound b;
  b.kind = Kind::PowerLower;
  b.K = K;
  b.eps = eps;
  return b;
}

ContinuityBound ContinuityBound::sub_exp_lower(double c) {
  require(std::isfinite(c) && c > 1, ErrorKind::Domain, "SubExpLower needs c > 1");
  ContinuityBound b;
  b.kind = Kind::SubExpLower;
  b.c = c;
  return b;
}

double ContinuityBound::log_value_at_log(double L) const {
  if (kind == Kind::PowerLower) return -2 * K * (1 + eps) * L;
  return -std::pow(L, c);
}

ComparatorReport continuity_comparator(const RadialMap& map, const ContinuityBound& bound, double r_lo, double r_hi,
                                       std::size_t points) {
  require(r_lo > 0 && r_lo < r_hi && r_hi < 1, ErrorKind::Domain, "need 0 < r_lo < r_hi < 1");
  require(points >= 2, ErrorKind::Domain, "need at least 2 grid points");
  auto gap = [&](double L) { return map.log_eta_at_log(L) - bound.log_value_at_log(L); };
  const double L_hi = -std::log(r_lo), L_lo = -std::log(r_hi);

  ComparatorReport rep;
  rep.grid_points = points;
  rep.log_best_c0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points; ++i) {
    const double L = L_lo + (L_hi - L_lo) * double(i) / double(points - 1);
    const double g = gap(L);
    rep.log_best_c0 = std::min(rep.log_best_c0, g);
    if (g < 0) {
      if (rep.violations == 0) rep.first_violation = std::exp(-L);
      ++rep.violations;
    }
  }
  rep.holds_on_grid = rep.violations == 0;

  // First sign change of the gap on a log grid in L over (0, L_hi].
  constexpr int kScan = 4000;
  const double L0 = 1e-3;
  double prev_L = L0, prev_g = gap(L0);
  for (int i = 1; i <= kScan; ++i) {
    const double L = L0 * std::pow(L_hi / L0, double(i) / kScan);
    const double g = gap(L);
    if ((g < 0) != (prev_g < 0)) {
      rep.crossing_log_inv = solve_bracketed(gap, prev_L, L);
      break;
    }
    prev_L = L;
    prev_g = g;
  }
  return rep;
}

double lower_exponent_bound(double K, double p, double c, double ell) {
  require(std::isfinite(ell) && ell >= 2, ErrorKind::Domain, "ell must be >= 2");
  return lower_exponent_bound_log(K, p, c, std::log1p(ell));
}

double lower_exponent_bound_log(double K, double p, double c, double log_ell_plus_1) {
  require(K >= 1 && p > 0 && c > 0, ErrorKind::Domain, "need K >= 1, p > 0, c > 0");
  require(log_ell_plus_1 >= std::log(3.0) * (1 - 1e-15), ErrorKind::Domain, "ell must be >= 2");
  return 2 * K * std::exp(c / (p * log_ell_plus_1));
}

double winding(const RadialMap& map, double theta, double r_inner, double r_outer) {
  require(r_inner > 0 && r_inner <= r_outer && r_outer <= 1, ErrorKind::Domain, "need 0 < r_inner <= r_outer <= 1");
  return winding_log(map, theta, -std::log(r_inner), -std::log(r_outer));
}

double winding_log(const RadialMap& map, double theta, double L_inner, double L_outer) {
  require(std::isfinite(L_inner) && L_outer >= 0 && L_inner >= L_outer, ErrorKind::Domain,
          "need 0 <= log(1/r_outer) <= log(1/r_inner) < inf");
  double u = L_outer;
  std::complex<double> d = map.direction_at_log(theta, u);
  double total = 0;
  double step = 0.25;
  while (u < L_inner) {
    const double du = std::min(step, L_inner - u);
    const std::complex<double> dn = map.direction_at_log(theta, u + du);
    const double inc = std::arg(dn * std::conj(d));
    if (std::fabs(inc) >= kPi / 4) {
      step = 0.5 * du;
      if (step < 1e-12) fail(ErrorKind::Sampling, "argument increments cannot be bounded");
      continue;
    }
    total += inc;
    u += du;
    d = dn;
    step = std::min(1.0, 1.25 * du);
  }
  return -total;
}

double winding_max(const RadialMap& map, double r, int directions) {
  require(directions >= 1, ErrorKind::Domain, "need at least one direction");
  std::vector<double> w(directions);
  parallel_for(directions, [&](std::size_t j) { w[j] = winding(map, 2 * kPi * double(j) / directions, r); });
  return *std::max_element(w.begin(), w.end());
}

RotationReport rotation_bound_check(const RadialMap& map, double K, double c, int k_lo, int k_hi) {
  require(K >= 1 && c > 0, ErrorKind::Domain, "need K >= 1 and c > 0");
  require(0 < k_lo && k_lo <= k_hi, ErrorKind::Domain, "need 0 < k_lo <= k_hi");
  const DistortionProfile prof(map);
  RotationReport rep;
  rep.K = K;
  rep.c = c;
  rep.measured_K = 1;
  for (int i = 0; i <= 4 * (k_hi - k_lo); ++i) rep.measured_K = std::max(rep.measured_K, prof.at_log(k_lo + 0.25 * i));
  if (K < rep.measured_K * (1 - 1e-9))
    fail(ErrorKind::InconsistentK,
         "claimed K = " + std::to_string(K) + " is below the measured distortion " + std::to_string(rep.measured_K));
  rep.pass = true;
  rep.within_benchmark = true;
  for (int k = k_lo; k <= k_hi; ++k) {
    RotationRow row;
    row.k = k;
    row.winding = winding(map, 0.0, std::exp(-double(k)));
    row.bound = c * K * k;
    row.benchmark = (K - 1 / K) * k;
    rep.pass = rep.pass && row.winding <= row.bound * (1 + 1e-12);
    rep.within_benchmark = rep.within_benchmark && row.winding <= row.benchmark * (1 + 1e-12);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace qcml
