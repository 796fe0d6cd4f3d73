#include "qcml/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcml/errors.hpp"
#include "qcml/numerics.hpp"

namespace qcml {

const char* gauge_kind_name(GaugeKind kind) noexcept {
  switch (kind) {
    case GaugeKind::Exponential: return "Exponential";
    case GaugeKind::PowerExponential: return "PowerExponential";
    case GaugeKind::SubExponentialLog: return "SubExponentialLog";
    case GaugeKind::PowerLp: return "PowerLp";
    case GaugeKind::Tabulated: return "Tabulated";
  }
  return "?";
}

namespace {
void positive(double v, const char* name) {
  require(std::isfinite(v) && v > 0, ErrorKind::Domain, std::string(name) + " must be positive and finite");
}
}  // namespace

Gauge Gauge::exponential(double p) {
  positive(p, "p");
  Gauge g;
  g.kind_ = GaugeKind::Exponential;
  g.p_ = p;
  return g;
}

Gauge Gauge::power_exponential(double p, double alpha) {
  positive(p, "p");
  require(std::isfinite(alpha) && alpha >= 1, ErrorKind::Domain, "alpha must be >= 1");
  Gauge g;
  g.kind_ = GaugeKind::PowerExponential;
  g.p_ = p;
  g.alpha_ = alpha;
  return g;
}

Gauge Gauge::sub_exponential_log(double p, double beta, double offset) {
  positive(p, "p");
  require(beta > 0 && beta <= 1, ErrorKind::Domain, "beta must lie in (0, 1]");
  require(std::isfinite(offset) && offset >= 0, ErrorKind::Domain, "offset must be >= 0");
  Gauge g;
  g.kind_ = GaugeKind::SubExponentialLog;
  g.p_ = p;
  g.beta_ = beta;
  g.offset_ = offset;
  g.x1_ = std::max(1.0, std::exp(beta + 1 - offset));
  const double u = offset + std::log(g.x1_);
  g.g1_ = p * g.x1_ / std::pow(u, beta);
  g.dg1_ = p * (u - beta) / std::pow(u, beta + 1);
  return g;
}

Gauge Gauge::power_lp(double p) {
  require(std::isfinite(p) && p >= 1, ErrorKind::Domain, "PowerLp needs p >= 1");
  Gauge g;
  g.kind_ = GaugeKind::PowerLp;
  g.p_ = p;
  return g;
}

Gauge Gauge::tabulated(std::vector<std::pair<double, double>> samples) {
  require(samples.size() >= 3, ErrorKind::Domain, "tabulated gauge needs at least 3 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto [x, y] = samples[i];
    require(std::isfinite(x) && std::isfinite(y) && y > 0, ErrorKind::Domain, "samples must be finite with psi > 0");
    if (i > 0) {
      require(x > samples[i - 1].first, ErrorKind::Domain, "sample abscissae must increase");
      require(y > samples[i - 1].second, ErrorKind::Domain, "sample values must increase");
    }
  }
  require(samples.front().first <= 1.0, ErrorKind::Domain, "samples must start at or below x = 1");
  // Discrete convexity: secant slopes nondecreasing.
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const auto [x0, y0] = samples[i - 1];
    const auto [x1, y1] = samples[i];
    const auto [x2, y2] = samples[i + 1];
    const double s0 = (y1 - y0) / (x1 - x0);
    const double s1 = (y2 - y1) / (x2 - x1);
    require(s1 >= s0 - 1e-7 * std::max(std::fabs(s0), std::fabs(s1)), ErrorKind::Domain,
            "tabulated gauge violates convexity at x = " + std::to_string(x1));
  }
  Gauge g;
  g.kind_ = GaugeKind::Tabulated;
  g.samples_ = std::move(samples);
  for (const auto& s : g.samples_) g.tab_g_.push_back(std::log(s.second));
  return g;
}

double Gauge::domain_lo() const { return 1.0; }

double Gauge::domain_hi() const {
  return kind_ == GaugeKind::Tabulated ? samples_.back().first : std::numeric_limits<double>::infinity();
}

std::vector<double> Gauge::kinks() const {
  std::vector<double> out;
  if (kind_ == GaugeKind::Tabulated)
    for (const auto& s : samples_) out.push_back(s.first);
  return out;
}

void Gauge::check_domain(double x) const {
  if (!(x >= 1.0)) fail(ErrorKind::Domain, "gauge argument must be >= 1");
  if (kind_ == GaugeKind::Tabulated && x > samples_.back().first)
    fail(ErrorKind::Extrapolation, "argument outside the tabulated hull");
}

double Gauge::sub_g(double x) const {
  if (x < x1_) return g1_ + dg1_ * (x - x1_);
  return p_ * x / std::pow(offset_ + std::log(x), beta_);
}

double Gauge::sub_dg(double x) const {
  if (x < x1_) return dg1_;
  const double u = offset_ + std::log(x);
  return p_ * (u - beta_) / std::pow(u, beta_ + 1);
}

double Gauge::sub_d2g(double x) const {
  if (x < x1_) return 0.0;
  const double u = offset_ + std::log(x);
  return p_ * beta_ * (beta_ + 1 - u) / (x * std::pow(u, beta_ + 2));
}

double Gauge::log_gauge(double x) const {
  check_domain(x);
  switch (kind_) {
    case GaugeKind::Exponential: return p_ * x;
    case GaugeKind::PowerExponential: return p_ * std::pow(x, alpha_);
    case GaugeKind::SubExponentialLog: return sub_g(x);
    case GaugeKind::PowerLp: return p_ * std::log(x);
    case GaugeKind::Tabulated: {
      auto it = std::upper_bound(samples_.begin(), samples_.end(), x,
                                 [](double v, const auto& s) { return v < s.first; });
      std::size_t i = static_cast<std::size_t>(it - samples_.begin());
      if (i >= samples_.size()) return tab_g_.back();
      if (i == 0) i = 1;
      const double x0 = samples_[i - 1].first, x1 = samples_[i].first;
      const double t = (x - x0) / (x1 - x0);
      return tab_g_[i - 1] + t * (tab_g_[i] - tab_g_[i - 1]);
    }
  }
  return 0;
}

double Gauge::eval(double x) const { return std::exp(log_gauge(x)); }

double Gauge::log_gauge_derivative(double x) const {
  check_domain(x);
  switch (kind_) {
    case GaugeKind::Exponential: return p_;
    case GaugeKind::PowerExponential: return p_ * alpha_ * std::pow(x, alpha_ - 1);
    case GaugeKind::SubExponentialLog: return sub_dg(x);
    case GaugeKind::PowerLp: return p_ / x;
    case GaugeKind::Tabulated: {
      const double h = 1e-6 * x;
      const double lo = std::max(1.0, x - h), hi = std::min(domain_hi(), x + h);
      return (log_gauge(hi) - log_gauge(lo)) / (hi - lo);
    }
  }
  return 0;
}

double Gauge::log_gauge_second_derivative(double x) const {
  check_domain(x);
  switch (kind_) {
    case GaugeKind::Exponential: return 0.0;
    case GaugeKind::PowerExponential: return p_ * alpha_ * (alpha_ - 1) * std::pow(x, alpha_ - 2);
    case GaugeKind::SubExponentialLog: return sub_d2g(x);
    case GaugeKind::PowerLp: return -p_ / (x * x);
    case GaugeKind::Tabulated: return 0.0;
  }
  return 0;
}

double Gauge::log_inverse_log(double log_y) const {
  const double g_at_1 = log_gauge(1.0);
  if (!(log_y >= g_at_1)) {
    if (log_y >= g_at_1 - 1e-14 * std::max(1.0, std::fabs(g_at_1))) return 0.0;
    fail(ErrorKind::BelowRange, "value below psi(1)");
  }
  switch (kind_) {
    case GaugeKind::Exponential: return std::log(log_y / p_);
    case GaugeKind::PowerExponential: return std::log(log_y / p_) / alpha_;
    case GaugeKind::PowerLp: return log_y / p_;
    case GaugeKind::SubExponentialLog: {
      if (log_y <= g1_) return std::log(x1_ + (log_y - g1_) / dg1_);
      // log g(e^s) = log p + s - beta log(offset + s), increasing for s >= log x1.
      const double target = std::log(log_y) - std::log(p_);
      auto phi = [&](double s) { return s - beta_ * std::log(offset_ + s) - target; };
      const double s_lo = std::log(x1_);
      double step = 1.0, s_hi = s_lo + step;
      while (phi(s_hi) < 0) {
        step *= 2;
        s_hi = s_lo + step;
      }
      return solve_bracketed(phi, s_lo, s_hi);
    }
    case GaugeKind::Tabulated: {
      if (log_y > tab_g_.back()) fail(ErrorKind::Extrapolation, "value above the tabulated range");
      auto it = std::lower_bound(tab_g_.begin(), tab_g_.end(), log_y);
      std::size_t i = static_cast<std::size_t>(it - tab_g_.begin());
      if (i == 0) i = 1;
      const double t = (log_y - tab_g_[i - 1]) / (tab_g_[i] - tab_g_[i - 1]);
      const double x = samples_[i - 1].first + t * (samples_[i].first - samples_[i - 1].first);
      return std::log(std::max(1.0, x));
    }
  }
  return 0;
}

double Gauge::inverse_log(double log_y) const { return std::exp(log_inverse_log(log_y)); }

double Gauge::inverse(double y) const {
  if (!(y > 0)) fail(ErrorKind::BelowRange, "value below psi(1)");
  return inverse_log(std::log(y));
}

CavitationReport cavitation_test(const Gauge& psi) {
  CavitationReport rep;
  constexpr int kFirst = 10, kLast = 60;
  int last = kLast;
  if (psi.kind() == GaugeKind::Tabulated) {
    last = std::min(kLast, static_cast<int>(std::floor(std::log2(psi.domain_hi()))));
    if (last - kFirst < 4)
      fail(ErrorKind::Undecidable, "tabulated samples end before four doublings past 2^10");
  }
  for (int k = kFirst; k <= last; ++k) rep.horizons.push_back(std::ldexp(1.0, k));
  auto integrand = [&](double s) { return psi.log_gauge(std::exp(s)) * std::exp(-s); };
  std::vector<double> breaks;
  for (double x : psi.kinks())
    if (x > 0) breaks.push_back(std::log(x));
  for (std::size_t i = 0; i + 1 < rep.horizons.size(); ++i)
    rep.increments.push_back(
        integrate(integrand, std::log(rep.horizons[i]), std::log(rep.horizons[i + 1]), breaks, 1e-10));
  for (std::size_t i = 0; i + 1 < rep.increments.size(); ++i)
    rep.ratios.push_back(rep.increments[i + 1] / rep.increments[i]);

  switch (psi.kind()) {
    case GaugeKind::Exponential:
    case GaugeKind::PowerExponential:
    case GaugeKind::SubExponentialLog:
      rep.analytic = true;
      rep.verdict = Cavitation::Divergent;
      rep.integral = std::numeric_limits<double>::infinity();
      return rep;
    case GaugeKind::PowerLp:
      rep.analytic = true;
      rep.verdict = Cavitation::Convergent;
      rep.integral = psi.p() * (1 + std::log(2.0)) / 2;
      return rep;
    case GaugeKind::Tabulated: break;
  }
  const std::size_t n = rep.ratios.size();
  bool grows = true;
  for (std::size_t i = n - 3; i < n; ++i) grows = grows && rep.ratios[i] > 0.9;
  if (grows) {
    rep.verdict = Cavitation::Divergent;
    rep.integral = std::numeric_limits<double>::infinity();
  } else {
    rep.verdict = Cavitation::Convergent;
    // Partial integral plus a geometric tail bound from the last ratio.
    double partial = integrate(integrand, std::log(2.0), std::log(rep.horizons.front()), breaks, 1e-10);
    for (double d : rep.increments) partial += d;
    const double q = std::max(0.0, rep.ratios.back());
    rep.integral = partial + rep.increments.back() * q / (1 - std::min(q, 0.9));
  }
  return rep;
}

}  // namespace qcml
