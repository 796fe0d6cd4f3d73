#include "qcml/snake_domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qcml/errors.hpp"
#include "qcml/grid_capacity.hpp"
#include "qcml/numerics.hpp"

namespace qcml {

namespace {

constexpr double kPi = std::numbers::pi;

double dist(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool on_segment(const Point& p, const Point& a, const Point& b) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
         p[1] <= std::max(a[1], b[1]);
}

bool segments_touch(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(a, c, d)) return true;
  if (d2 == 0 && on_segment(b, c, d)) return true;
  if (d3 == 0 && on_segment(c, a, b)) return true;
  if (d4 == 0 && on_segment(d, a, b)) return true;
  return false;
}

}  // namespace

JordanPolyline::JordanPolyline(std::vector<Point> vertices) : v_(std::move(vertices)) {
  require(v_.size() >= 3, ErrorKind::Geometry, "polyline needs at least 3 vertices");
  cum_.assign(v_.size() + 1, 0.0);
  for (std::size_t i = 0; i < v_.size(); ++i) cum_[i + 1] = cum_[i] + dist(v_[i], v_[(i + 1) % v_.size()]);
}

Point JordanPolyline::point_at(double s) const {
  const double L = length();
  s = std::fmod(s, L);
  if (s < 0) s += L;
  auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - cum_.begin());
  i = i == 0 ? 0 : i - 1;
  if (i >= v_.size()) i = v_.size() - 1;
  const double seg = cum_[i + 1] - cum_[i];
  const double t = seg > 0 ? (s - cum_[i]) / seg : 0.0;
  const Point& a = v_[i];
  const Point& b = v_[(i + 1) % v_.size()];
  return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
}

double JordanPolyline::signed_area() const {
  double A = 0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const Point& a = v_[i];
    const Point& b = v_[(i + 1) % v_.size()];
    A += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * A;
}

std::pair<long, long> find_self_intersection(const JordanPolyline& poly) {
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto xmin = [&](std::size_t i) { return std::min(v[i][0], v[(i + 1) % n][0]); };
  auto xmax = [&](std::size_t i) { return std::max(v[i][0], v[(i + 1) % n][0]); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xmin(a) < xmin(b) || (xmin(a) == xmin(b) && a < b);
  });
  std::vector<std::size_t> active;
  for (std::size_t e : order) {
    const double x0 = xmin(e);
    active.erase(std::remove_if(active.begin(), active.end(), [&](std::size_t a) { return xmax(a) < x0; }),
                 active.end());
    const Point& a = v[e];
    const Point& b = v[(e + 1) % n];
    const double ylo = std::min(a[1], b[1]), yhi = std::max(a[1], b[1]);
    for (std::size_t f : active) {
      const Point& c = v[f];
      const Point& d = v[(f + 1) % n];
      if (std::max(c[1], d[1]) < ylo || std::min(c[1], d[1]) > yhi) continue;
      const bool adjacent = (e + 1) % n == f || (f + 1) % n == e;
      if (adjacent) {
        // Adjacent edges share one vertex; they may only overlap if collinear and folding back.
        const Point& shared = (e + 1) % n == f ? b : a;
        const Point& p = (e + 1) % n == f ? a : b;
        const Point& q = (e + 1) % n == f ? d : c;
        if (cross(shared, p, q) == 0 && (p[0] - shared[0]) * (q[0] - shared[0]) + (p[1] - shared[1]) * (q[1] - shared[1]) > 0)
          return {static_cast<long>(std::min(e, f)), static_cast<long>(std::max(e, f))};
        continue;
      }
      if (segments_touch(a, b, c, d)) return {static_cast<long>(std::min(e, f)), static_cast<long>(std::max(e, f))};
    }
    active.push_back(e);
  }
  return {-1, -1};
}

bool is_simple(const JordanPolyline& poly) { return find_self_intersection(poly).first < 0; }

JordanPolyline regular_polygon(std::size_t n) {
  require(n >= 3, ErrorKind::Geometry, "polygon needs at least 3 vertices");
  std::vector<Point> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2 * kPi * double(i) / double(n);
    v[i] = {std::cos(a), std::sin(a)};
  }
  return JordanPolyline(std::move(v));
}

JordanPolyline slit_disk(std::size_t arc_vertices, std::size_t slit_vertices) {
  require(arc_vertices >= 3 && slit_vertices >= 1, ErrorKind::Geometry, "slit disk needs more vertices");
  std::vector<Point> v;
  for (std::size_t i = 0; i <= arc_vertices; ++i) {
    const double a = 2 * kPi * double(i) / double(arc_vertices);
    v.push_back({std::cos(a), std::sin(a)});
  }
  v.back() = {1.0, 0.0};
  for (std::size_t i = 1; i <= slit_vertices; ++i) v.push_back({1.0 - double(i) / double(slit_vertices), 0.0});
  for (std::size_t i = 1; i < slit_vertices; ++i) v.push_back({double(i) / double(slit_vertices), 0.0});
  return JordanPolyline(std::move(v));
}

std::function<double(double)> log_power_control(double kappa) {
  return [kappa](double t) { return t <= 0 ? 0.0 : t * std::pow(std::log1p(1.0 / t), kappa); };
}

namespace {

// Smallest t with h(t) >= target, for increasing h.
double invert_control(const std::function<double(double)>& h, double target) {
  if (target <= 0) return 0;
  double lo = std::log(target) - 1, hi = std::log(target) + 1;
  while (h(std::exp(lo)) > target) lo -= 2 * (hi - lo);
  while (h(std::exp(hi)) < target) hi += 2 * (hi - lo);
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(std::exp(mid)) < target ? lo : hi) = mid;
  }
  return std::exp(hi);
}

struct AnchorResult {
  double ratio = -1;
  std::size_t j = 0;
  double distance = 0, diameter = 0;
  std::vector<std::pair<double, double>> frontier;  // (distance, diameter) pairs not dominated
};

}  // namespace

ThreePointReport three_point_check(const JordanPolyline& boundary, const std::function<double(double)>& h,
                                   const ThreePointOptions& opt) {
  require(opt.C >= 1, ErrorKind::Domain, "C must be >= 1");
  require(opt.samples >= 3, ErrorKind::Sampling, "need at least 3 samples");
  const std::size_t V = boundary.size();
  const double L = boundary.length();

  std::vector<double> s;
  switch (opt.mode) {
    case SampleMode::Vertices: {
      require(opt.samples <= V, ErrorKind::Sampling, "more samples than vertices");
      for (std::size_t i = 0; i < opt.samples; ++i) s.push_back(boundary.arc_at(i * V / opt.samples));
      break;
    }
    case SampleMode::ArcLength:
      for (std::size_t i = 0; i < opt.samples; ++i) s.push_back((i + 0.5) * L / opt.samples);
      break;
    case SampleMode::Jittered: {
      std::mt19937_64 rng(opt.seed);
      std::uniform_real_distribution<double> U(0.0, 1.0);
      for (std::size_t i = 0; i < opt.samples; ++i) s.push_back((i + U(rng)) * L / opt.samples);
      break;
    }
  }
  const std::size_t N = s.size();

  // Merge samples with every vertex so running maxima see the whole arc.
  struct Node {
    double s;
    Point p;
    long sample;  // -1 for plain vertices
  };
  std::vector<Node> nodes;
  nodes.reserve(V + N);
  for (std::size_t i = 0; i < V; ++i) nodes.push_back({boundary.arc_at(i), boundary.vertices()[i], -1});
  for (std::size_t i = 0; i < N; ++i) nodes.push_back({s[i], boundary.point_at(s[i]), static_cast<long>(i)});
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.s < b.s; });
  std::vector<std::size_t> where(N);
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k].sample >= 0) where[static_cast<std::size_t>(nodes[k].sample)] = k;
  const std::size_t M = nodes.size();

  std::vector<AnchorResult> per(N);
  parallel_for(N, [&](std::size_t a) {
    std::vector<double> fwd(N, 0.0), bwd(N, 0.0);
    const std::size_t ia = where[a];
    const Point& x = nodes[ia].p;
    double run = 0;
    for (std::size_t step = 1; step < M; ++step) {
      const Node& nd = nodes[(ia + step) % M];
      run = std::max(run, dist(x, nd.p));
      if (nd.sample >= 0) fwd[static_cast<std::size_t>(nd.sample)] = run;
    }
    run = 0;
    for (std::size_t step = 1; step < M; ++step) {
      const Node& nd = nodes[(ia + M - step) % M];
      run = std::max(run, dist(x, nd.p));
      if (nd.sample >= 0) bwd[static_cast<std::size_t>(nd.sample)] = run;
    }
    AnchorResult& r = per[a];
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(N);
    for (std::size_t j = 0; j < N; ++j) {
      if (j == a) continue;
      const double d = dist(x, nodes[where[j]].p);
      const double D = std::min(fwd[j], bwd[j]);
      const double hv = h(opt.C * d);
      const double ratio = hv > 0 ? D / hv : (D > 0 ? std::numeric_limits<double>::infinity() : 0.0);
      if (ratio > r.ratio) {
        r.ratio = ratio;
        r.j = j;
        r.distance = d;
        r.diameter = D;
      }
      pairs.emplace_back(d, D);
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& p, const auto& q) { return p.first < q.first || (p.first == q.first && p.second > q.second); });
    double best = -1;
    for (const auto& pr : pairs)
      if (pr.second > best) {
        r.frontier.push_back(pr);
        best = pr.second;
      }
  });

  ThreePointReport rep;
  rep.samples_used = N;
  std::size_t wa = 0;
  double worst = -1;
  for (std::size_t a = 0; a < N; ++a)
    if (per[a].ratio > worst) {
      worst = per[a].ratio;
      wa = a;
    }
  rep.worst_ratio = worst;
  rep.worst_ratio_upper = 2 * worst;
  rep.witness_x = nodes[where[wa]].p;
  rep.witness_y = nodes[where[per[wa].j]].p;
  rep.witness_distance = per[wa].distance;
  rep.witness_diameter = per[wa].diameter;
  rep.pass = rep.worst_ratio <= 1 + opt.slack;
  rep.certified = rep.worst_ratio_upper <= 1 + opt.slack;

  // Requirements from dominated pairs are implied by the frontier.
  std::vector<std::pair<double, double>> all;
  for (const auto& r : per) all.insert(all.end(), r.frontier.begin(), r.frontier.end());
  std::sort(all.begin(), all.end(),
            [](const auto& p, const auto& q) { return p.first < q.first || (p.first == q.first && p.second > q.second); });
  double scale = 0, best = -1;
  for (const auto& [d, D] : all) {
    if (D <= best) continue;
    best = D;
    if (D <= 0) continue;
    if (d <= 0) {
      scale = std::numeric_limits<double>::infinity();
      continue;
    }
    scale = std::max(scale, invert_control(h, 2 * D) / d);
  }
  rep.required_scale = std::max(1.0, scale);
  return rep;
}

// ---------------------------------------------------------------------------

double SnakeParams::width(double r) const {
  if (kind == ProfileKind::LogPower) return c * r / std::pow(std::log1p(1.0 / r), 0.5 + epsilon);
  return c * std::pow(r, 1.0 / s);
}

std::pair<std::size_t, std::size_t> SnakeGeometry::tip_range(double rbar) const {
  const double x_cut = rbar;
  std::size_t lo = wall_end, hi = wall_begin;
  const auto& v = boundary.vertices();
  for (std::size_t i = wall_begin; i < wall_end; ++i)
    if (v[i][0] <= x_cut) {
      lo = std::min(lo, i);
      hi = std::max(hi, i + 1);
    }
  if (lo >= hi) return {0, 0};
  return {lo, hi};
}

namespace {

void validate_params(const SnakeParams& p) {
  require(p.alpha > 0 && p.alpha <= kPi / 2, ErrorKind::Domain, "alpha must lie in (0, pi/2]");
  require(p.r_min > 0 && p.r_min < 1, ErrorKind::Domain, "r_min must lie in (0, 1)");
  require(p.c > 0 && std::isfinite(p.c), ErrorKind::Domain, "width constant must be positive");
  require(p.tubes_per_decade >= 1, ErrorKind::Domain, "tubes_per_decade must be positive");
  if (p.kind == ProfileKind::LogPower)
    require(p.epsilon > 0 && std::isfinite(p.epsilon), ErrorKind::Domain, "epsilon must be positive");
  else
    require(p.s > 0 && p.s < 1, ErrorKind::Domain, "s must lie in (0, 1)");
}

Point intersect_offsets(const Point& P, const Point& d0, double h0, const Point& d1, double h1) {
  // Lines P + h0 n0 + t d0 and P + h1 n1 + u d1 with n = (-d_y, d_x).
  const Point a{P[0] - h0 * d0[1], P[1] + h0 * d0[0]};
  const Point b{P[0] - h1 * d1[1], P[1] + h1 * d1[0]};
  const double det = d0[0] * (-d1[1]) - d0[1] * (-d1[0]);
  if (std::fabs(det) < 1e-300) return b;
  const double rx = b[0] - a[0], ry = b[1] - a[1];
  const double t = (rx * (-d1[1]) - ry * (-d1[0])) / det;
  return {a[0] + t * d0[0], a[1] + t * d0[1]};
}

}  // namespace

SnakeGeometry build_snake(const SnakeParams& params) {
  validate_params(params);
  const double t = std::tan(params.alpha / 2);

  std::vector<double> r{0.5};
  for (;;) {
    const double w = params.width(r.back());
    const double next = r.back() - 2 * w;
    if (next < params.r_min || !(next > 0)) break;
    require(r.size() < 5'000'000, ErrorKind::Geometry, "too many tubes");
    r.push_back(next);
  }
  const std::size_t N = r.size();
  require(N >= 3, ErrorKind::Geometry, "fewer than 3 tubes fit above r_min");
  std::vector<double> w(N);
  for (std::size_t n = 0; n < N; ++n) {
    w[n] = params.width(r[n]);
    require(w[n] < r[n] * t / 4, ErrorKind::Geometry, "tube width exceeds a quarter of the sector height");
  }
  require(params.width(params.r_min) < params.r_min * t / 4, ErrorKind::Geometry,
          "tube width exceeds a quarter of the sector height at r_min");

  // Turn k joins tube k to tube k+1 on side sigma_k, outer edge at height H_k.
  auto sigma = [](std::size_t k) { return k % 2 == 0 ? 1.0 : -1.0; };
  std::vector<double> H(N - 1);
  for (std::size_t k = 0; k + 1 < N; ++k) H[k] = r[k + 1] * t - w[k + 1];

  // Centerline of the channel and per-segment half widths.
  std::vector<Point> P;
  std::vector<double> hw;
  auto cx = [&](std::size_t n) { return r[n] - w[n] / 2; };
  P.push_back({1.0, 0.0});
  P.push_back({cx(0), 0.0});
  hw.push_back(w[0] / 2);
  for (std::size_t n = 0; n < N; ++n) {
    if (n + 1 < N) {
      const double yc = sigma(n) * (H[n] - w[n + 1] / 2);
      P.push_back({cx(n), yc});
      hw.push_back(w[n] / 2);
      P.push_back({cx(n + 1), yc});
      hw.push_back(w[n + 1] / 2);
    } else {
      P.push_back({cx(n), sigma(n) * (r[n] * t - w[n])});
      hw.push_back(w[n] / 2);
    }
  }

  const std::size_t S = hw.size();  // segments P[k] -> P[k+1]
  std::vector<Point> dir(S);
  for (std::size_t k = 0; k < S; ++k) {
    const double dx = P[k + 1][0] - P[k][0], dy = P[k + 1][1] - P[k][1];
    const double len = std::hypot(dx, dy);
    require(len > 0, ErrorKind::Geometry, "degenerate channel segment");
    dir[k] = {dx / len, dy / len};
  }
  std::vector<Point> left, right;
  const double xm = std::sqrt(1 - hw[0] * hw[0]);
  left.push_back({xm, -hw[0]});
  right.push_back({xm, hw[0]});
  for (std::size_t k = 1; k < S; ++k) {
    left.push_back(intersect_offsets(P[k], dir[k - 1], hw[k - 1], dir[k], hw[k]));
    right.push_back(intersect_offsets(P[k], dir[k - 1], -hw[k - 1], dir[k], -hw[k]));
  }
  const Point& E = P[S];
  const Point& dl = dir[S - 1];
  left.push_back({E[0] - hw[S - 1] * dl[1], E[1] + hw[S - 1] * dl[0]});
  right.push_back({E[0] + hw[S - 1] * dl[1], E[1] - hw[S - 1] * dl[0]});

  const int split = params.tubes_per_decade;
  std::vector<Point> verts;
  const double th = std::asin(hw[0]);
  const int arc_n = 720;
  for (int i = 0; i < arc_n; ++i) {
    const double a = th + (2 * kPi - 2 * th) * i / (arc_n - 1);
    verts.push_back({std::cos(a), std::sin(a)});
  }
  verts.back() = left.front();
  verts.front() = right.front();
  auto push_edge = [&](const Point& a, const Point& b) {
    for (int q = 1; q < split; ++q) {
      const double f = double(q) / split;
      verts.push_back({a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])});
    }
    verts.push_back(b);
  };
  SnakeGeometry g;
  g.params = params;
  g.wall_begin = verts.size() - 1;
  for (std::size_t i = 1; i < left.size(); ++i) push_edge(left[i - 1], left[i]);
  push_edge(left.back(), right.back());
  for (std::size_t i = right.size() - 1; i-- > 1;) push_edge(right[i + 1], right[i]);
  // Final edge right[1] -> right[0] closes onto vertex 0.
  for (int q = 1; q < split; ++q) {
    const double f = double(q) / split;
    verts.push_back({right[1][0] + f * (right[0][0] - right[1][0]), right[1][1] + f * (right[0][1] - right[1][1])});
  }
  g.wall_end = verts.size();
  g.boundary = JordanPolyline(std::move(verts));
  require(g.boundary.signed_area() > 0, ErrorKind::Geometry, "boundary is not positively oriented");
  const auto bad = find_self_intersection(g.boundary);
  if (bad.first >= 0)
    fail(ErrorKind::Geometry, "boundary self-intersects at edges " + std::to_string(bad.first) + " and " +
                                  std::to_string(bad.second));

  // Straight sections between the inner edges of the turns.
  for (std::size_t n = 0; n < N; ++n) {
    double ya, yb;
    if (n == 0) ya = w[0] / 2;
    else ya = sigma(n - 1) * (H[n - 1] - w[n]);
    if (n + 1 < N) yb = sigma(n) * (H[n] - w[n + 1]);
    else yb = sigma(n) * (r[n] * t - w[n]);
    g.tubes.push_back({r[n], w[n], std::min(ya, yb), std::max(ya, yb)});
  }
  return g;
}

double preimage_diam_exponent(double K, double alpha) {
  require(std::isfinite(K) && K >= 1, ErrorKind::Domain, "K must be >= 1");
  require(alpha > 0 && alpha < kPi, ErrorKind::Domain, "alpha must lie in (0, pi)");
  return kPi * K / (2 * kPi - 2 * alpha);
}

UpperBoundReport upper_bound_weighted_modulus_exp(double log_inv_rbar, double K, double p, double alpha,
                                                  double I_exp) {
  require(p > 0 && std::isfinite(p), ErrorKind::Domain, "p must be positive");
  require(I_exp >= 0 && std::isfinite(I_exp), ErrorKind::Domain, "budget must be nonnegative");
  UpperBoundReport rep;
  rep.exponent = preimage_diam_exponent(K, alpha);
  rep.log_inv_d = rep.exponent * log_inv_rbar;
  require(rep.log_inv_d > 0, ErrorKind::Domain, "preimage diameter bound must be below 1");
  const auto dy = dyadic_density_bound_log(1.0, rep.log_inv_d);
  rep.n = dy.value / (kPi + 4);
  rep.budget_term = I_exp / p;
  rep.geometric_term = 3 * (kPi + 4) * rep.n * rep.log_inv_d / p;
  rep.value = rep.budget_term + rep.geometric_term;
  return rep;
}

UpperBoundReport upper_bound_weighted_modulus_Lp(double log_inv_rbar, double K, double p, double alpha, double I_p) {
  require(p >= 1 && std::isfinite(p), ErrorKind::Domain, "Lp bound needs p >= 1");
  require(I_p > 0 && std::isfinite(I_p), ErrorKind::Domain, "budget must be positive");
  UpperBoundReport rep;
  rep.exponent = preimage_diam_exponent(K, alpha);
  rep.log_inv_d = rep.exponent * log_inv_rbar;
  require(rep.log_inv_d > 0, ErrorKind::Domain, "preimage diameter bound must be below 1");
  if (p == 1) {
    rep.C_p = kPi + 4;
    rep.budget_term = std::log(I_p);
    rep.geometric_term = 2 * rep.log_inv_d;
  } else {
    rep.C_p = (kPi + 4) / (1 - std::pow(2.0, -2 / (p - 1)));
    rep.budget_term = std::log(I_p) / p + (p - 1) / p * std::log(rep.C_p);
    rep.geometric_term = 2 * rep.log_inv_d / p;
  }
  // Log-scale factors; value overflows for tiny rbar.
  rep.value = std::exp(rep.budget_term + rep.geometric_term);
  return rep;
}

namespace {
double log_upper_Lp(double L, double K, double p, double alpha, double I) {
  const auto u = upper_bound_weighted_modulus_Lp(L, K, p, alpha, I);
  return u.budget_term + u.geometric_term;
}
}  // namespace

double tube_integral(const SnakeParams& params, const Tube& tube) {
  const double x0 = tube.r - tube.w, x1 = tube.r;
  std::function<double(double)> rho2;
  if (params.kind == ProfileKind::LogPower) {
    const double q = 1 + 2 * params.epsilon;
    rho2 = [q](double m2) { return std::pow(std::log1p(1 / std::sqrt(m2)), q) / m2; };
  } else {
    const double q = 1 / params.s;
    rho2 = [q](double m2) { return std::pow(m2, -q); };
  }
  auto inner = [&](double x) {
    return integrate([&](double y) { return rho2(x * x + y * y); }, tube.y0, tube.y1, 1e-10);
  };
  return integrate(inner, x0, x1, 1e-8);
}

double tunnel_lower_modulus(const SnakeGeometry& geometry, double rbar) {
  require(rbar >= geometry.params.r_min, ErrorKind::Domain, "rbar below the construction cutoff r_min");
  std::size_t count = 0;
  while (count < geometry.tubes.size() && geometry.tubes[count].r > rbar) ++count;
  std::vector<double> parts(count);
  parallel_for(count, [&](std::size_t n) { parts[n] = tube_integral(geometry.params, geometry.tubes[n]); });
  double total = 0;
  for (double v : parts) total += v;
  return total;
}

double LowerModel::log_value(double L) const {
  const double L0 = std::log(2.0);
  if (L <= L0) return -std::numeric_limits<double>::infinity();
  if (kind == ProfileKind::LogPower) {
    // log(L^a - L0^a) without overflow.
    const double la = exponent * std::log(L), l0 = exponent * std::log(L0);
    return std::log(C_l) + la + std::log1p(-std::exp(l0 - la));
  }
  const double a = exponent * L, b = exponent * L0;
  return std::log(C_l) + a + std::log1p(-std::exp(b - a));
}

LowerModel lower_model(const SnakeParams& params) {
  validate_params(params);
  LowerModel m;
  m.kind = params.kind;
  if (params.kind == ProfileKind::LogPower) {
    m.exponent = 2 + 2 * params.epsilon;
    m.C_l = params.alpha / (4 * (1 + params.epsilon));
  } else {
    const double t = std::tan(params.alpha / 2), q = 1 / params.s;
    const double J = integrate([q](double u) { return std::pow(1 + u * u, -q); }, -t, t, 1e-12);
    m.exponent = 2 / params.s - 2;
    m.C_l = J / (2 * m.exponent);
  }
  return m;
}

double exponent_threshold(double s) {
  require(s > 0 && s < 1, ErrorKind::Domain, "s must lie in (0, 1)");
  return s / (2 * (1 - s));
}

double exponent_threshold_alpha(double s, double K, double alpha) {
  return 2 * preimage_diam_exponent(K, alpha) * exponent_threshold(s);
}

CrossoverReport crossover(const SnakeParams& params, double K, double p, CrossoverMode mode, double budget) {
  const LowerModel low = lower_model(params);
  const double e = preimage_diam_exponent(K, params.alpha);
  CrossoverReport rep;
  rep.C_l = low.C_l;
  std::function<double(double)> log_upper;
  if (mode == CrossoverMode::Exp) {
    require(params.kind == ProfileKind::LogPower, ErrorKind::Config, "Exp mode pairs with the LogPower profile");
    require(p > 0, ErrorKind::Domain, "p must be positive");
    log_upper = [=](double L) { return std::log(upper_bound_weighted_modulus_exp(L, K, p, params.alpha, budget).value); };
    rep.C_u = 3 * (kPi + 4) * e * e / (p * std::log(2.0));
    rep.closed_form_log_inv = std::pow(rep.C_u / rep.C_l, 1 / (2 * params.epsilon));
  } else {
    require(params.kind == ProfileKind::Power, ErrorKind::Config, "Lp mode pairs with the Power profile");
    const double rate_up = 2 * e / p;
    if (!(low.exponent > rate_up))
      fail(ErrorKind::NoCrossover, "p = " + std::to_string(p) + " does not exceed the threshold " +
                                       std::to_string(exponent_threshold_alpha(params.s, K, params.alpha)));
    require(p >= 1, ErrorKind::Domain, "Lp mode needs p >= 1");
    log_upper = [=](double L) { return log_upper_Lp(L, K, p, params.alpha, budget); };
    const double log_U0 = log_upper_Lp(1.0, K, p, params.alpha, budget) - rate_up;
    rep.C_u = std::exp(log_U0);
    rep.closed_form_log_inv = std::max(std::log(2.0), (log_U0 - std::log(low.C_l)) / (low.exponent - rate_up));
  }
  auto gap = [&](double L) { return low.log_value(L) - log_upper(L); };

  double lo = std::log(2.0) * (1 + 1e-9), hi = 2 * lo;
  if (gap(lo) > 0) {
    hi = lo;
  } else {
    while (gap(hi) <= 0) {
      lo = hi;
      hi *= 2;
      if (!(hi < 1e300)) fail(ErrorKind::NoCrossover, "no crossover below log(1/rbar) = 1e300");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (gap(mid) > 0 ? hi : lo) = mid;
    }
  }
  rep.log_inv_rbar_star = hi;
  rep.log_lower_at = low.log_value(hi);
  rep.log_upper_at = log_upper(hi);
  return rep;
}

}  // namespace qcml
