#include "qcml/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "qcml/errors.hpp"

namespace qcml {

namespace {
constexpr std::size_t kMaxIntervals = 4000;

struct Piece {
  double a, b, value, err, l1;
  bool operator<(const Piece& o) const { return err < o.err; }
};

Piece gk15(const RealFn& f, double a, double b) {
  Piece p{a, b, 0, 0, 0};
  p.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &p.err, &p.l1);
  return p;
}
}  // namespace

// Globally adaptive: always bisect the piece with the largest error estimate.
// Stops at the requested tolerance or once the estimate reaches rounding level.
double integrate(const RealFn& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::Integration, "integration limits must be finite");
  // Work on [0, 1]: the library's error estimate has a floor that scales
  // with 1 / (b - a), which misbehaves on tiny intervals.
  const double width = b - a;
  const RealFn g = [&](double u) { return f(a + width * u) * width; };
  std::priority_queue<Piece> heap;
  Piece first = gk15(g, 0.0, 1.0);
  double value = first.value, err = first.err, l1 = first.l1;
  heap.push(first);
  auto done = [&] {
    const double floor = 1e-13 * l1;
    return err <= std::max(rel_tol * l1, floor) || err <= 1e-300;
  };
  while (!done() && heap.size() < kMaxIntervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      heap.push(worst);
      break;
    }
    Piece left = gk15(g, worst.a, mid), right = gk15(g, mid, worst.b);
    value += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  if (!std::isfinite(value)) fail(ErrorKind::Integration, "integrand produced a non-finite value");
  // Re-sum to drop drift from the running updates.
  value = err = l1 = 0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().err;
    l1 += heap.top().l1;
    heap.pop();
  }
  const double floor = 1e-13 * l1;
  if (err > std::max(rel_tol * l1, floor) && err > 1e-300)
    fail(ErrorKind::Integration,
         "quadrature did not reach relative tolerance (estimate " + std::to_string(err / std::max(l1, 1e-300)) + ")");
  return value;
}

double integrate(const RealFn& f, double a, double b, const std::vector<double>& breaks, double rel_tol) {
  double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> pts{lo};
  for (double x : breaks)
    if (x > lo && x < hi) pts.push_back(x);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += integrate(f, pts[i], pts[i + 1], rel_tol);
  return a <= b ? total : -total;
}

double log_add_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::fabs(x - y)));
}

double log_integrate_exp(const RealFn& h, double a, double b, double rel_tol) {
  if (a == b) return -std::numeric_limits<double>::infinity();
  double shift = -std::numeric_limits<double>::infinity();
  constexpr int kProbe = 33;
  for (int i = 0; i <= kProbe; ++i) shift = std::max(shift, h(a + (b - a) * i / kProbe));
  if (!std::isfinite(shift)) fail(ErrorKind::Integration, "log-integrand is not finite");
  double v = integrate([&](double x) { return std::exp(h(x) - shift); }, a, b, rel_tol);
  return shift + std::log(std::fabs(v));
}

double log_shell_integral(const RealFn& h, double a, double width) {
  if (std::fabs(a) < 1e4) return log_integrate_exp(h, a, a + width, 1e-10);
  const double m = a + 0.5 * width, dm = 1e-4 * std::fabs(m);
  const double x = 0.25 * width * (h(m + dm) - h(m - dm)) / dm;
  const double ax = std::fabs(x);
  const double shape = ax < 1e-8 ? 0.0 : ax > 20 ? ax - std::log(2 * ax) : std::log(std::sinh(ax) / ax);
  return h(m) + std::log(width) + shape;
}

double solve_bracketed(const RealFn& f, double lo, double hi, double abs_tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) fail(ErrorKind::Solver, "root not bracketed");
  std::uintmax_t iters = 300;
  auto tol = [abs_tol](double x, double y) {
    return std::fabs(x - y) <= std::max(abs_tol, 4 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(x), std::fabs(y)));
  };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorKind::Domain, "fit_slope needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QCML_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

TailReport classify_tail(const RealFn& log_term, int first, int direct, double k_max) {
  if (direct <= first) fail(ErrorKind::Domain, "tail horizon must exceed the first shell");
  TailReport rep;
  double acc = -std::numeric_limits<double>::infinity();
  for (int k = first; k <= direct; ++k) {
    acc = log_add_exp(acc, log_term(k));
    rep.log_partial_sums.push_back(acc);
  }
  constexpr double kDelta = 1e-3;
  const double dlog = std::log((1 + kDelta) / (1 - kDelta));
  for (double k = direct; k <= k_max; k *= 2) {
    double up = log_term(k * (1 + kDelta));
    double dn = log_term(k * (1 - kDelta));
    if (!std::isfinite(up) || !std::isfinite(dn)) break;
    TailProbe p;
    p.k = k;
    p.log_term = log_term(k);
    p.power_slope = (up - dn) / dlog;
    p.bertrand = (p.power_slope + 1) * std::log(k);
    p.rate = -(up - dn) / (2 * kDelta * k);
    rep.probes.push_back(p);
  }
  if (rep.probes.size() < 3) fail(ErrorKind::Undecidable, "tail probes ended before a trend was established");
  constexpr double kTol = 1e-3;
  int conv = 0, div = 0;
  for (std::size_t i = rep.probes.size() - 3; i < rep.probes.size(); ++i) {
    if (rep.probes[i].bertrand < -1 - kTol)
      ++conv;
    else
      ++div;
  }
  if (conv != 3 && div != 3) fail(ErrorKind::Undecidable, "tail trend is not stable over the last three horizons");
  rep.verdict = conv == 3 ? TailVerdict::Convergent : TailVerdict::Divergent;
  rep.power_slope = rep.probes.back().power_slope;
  rep.rate = rep.probes.back().rate;
  return rep;
}

}  // namespace qcml
