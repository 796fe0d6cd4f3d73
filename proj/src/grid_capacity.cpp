#include "qcml/grid_capacity.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "qcml/errors.hpp"

namespace qcml {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

bool dirichlet(CellLabel l) { return l == CellLabel::Source || l == CellLabel::Sink; }

void positive(double v, const char* what) {
  require(std::isfinite(v) && v > 0, ErrorKind::Domain, std::string(what) + " must be positive and finite");
}

class Rectangle : public GridGeometry {
 public:
  Rectangle(double w, double h, std::array<double, 4> hole, bool has_hole)
      : w_(w), h_(h), hole_(hole), has_hole_(has_hole) {}
  CellLabel classify(double x, double y) const override {
    if (y < 0 || y > h_) return CellLabel::Outside;
    if (x <= 0) return CellLabel::Source;
    if (x >= w_) return CellLabel::Sink;
    if (has_hole_ && x >= hole_[0] && x <= hole_[1] && y >= hole_[2] && y <= hole_[3]) return CellLabel::Outside;
    return CellLabel::Interior;
  }
  std::array<double, 4> bbox(double h) const override { return {-h, w_ + h, 0.0, h_}; }
  std::string name() const override { return has_hole_ ? "rectangle_obstacle" : "rectangle"; }

 private:
  double w_, h_;
  std::array<double, 4> hole_;
  bool has_hole_;
};

class Annulus : public GridGeometry {
 public:
  Annulus(double r, double R) : r_(r), R_(R) {}
  CellLabel classify(double x, double y) const override {
    const double rho = std::hypot(x, y);
    if (rho <= r_) return CellLabel::Source;
    if (rho >= R_) return CellLabel::Sink;
    return CellLabel::Interior;
  }
  std::array<double, 4> bbox(double h) const override { return {-R_ - h, R_ + h, -R_ - h, R_ + h}; }
  std::string name() const override { return "annulus"; }

 private:
  double r_, R_;
};

class SectorAnnulus : public GridGeometry {
 public:
  SectorAnnulus(double r, double R, double alpha) : r_(r), R_(R), alpha_(alpha) {}
  CellLabel classify(double x, double y) const override {
    const double rho = std::hypot(x, y);
    if (rho <= r_ || rho >= R_) return CellLabel::Outside;
    const double th = std::atan2(y, x);
    if (std::fabs(th) >= alpha_ / 2) return CellLabel::Interior;
    if (th >= alpha_ / 4) return CellLabel::Source;
    if (th <= -alpha_ / 4) return CellLabel::Sink;
    return CellLabel::Outside;
  }
  std::array<double, 4> bbox(double h) const override { return {-R_ - h, R_ + h, -R_ - h, R_ + h}; }
  std::string name() const override { return "sector_annulus"; }

 private:
  double r_, R_, alpha_;
};

double cell_weight(const GridDomain& d, const WeightField* w, int ix, int iy) {
  if (!w) return 1.0;
  if (w->fn) return w->fn(d.cx(ix), d.cy(iy));
  return w->values[static_cast<std::size_t>(iy) * d.nx + ix];
}

std::vector<double> sample_weights(const GridDomain& d, const WeightField* w) {
  std::vector<double> out(d.labels.size(), 1.0);
  if (!w) return out;
  if (!w->fn)
    require(w->values.size() == d.labels.size(), ErrorKind::Config, "weight values do not match the grid size");
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * d.nx + ix;
      if (d.labels[i] == CellLabel::Outside) continue;
      const double v = cell_weight(d, w, ix, iy);
      require(std::isfinite(v) && v >= 1.0, ErrorKind::Domain, "weight must be finite and >= 1");
      out[i] = v;
    }
  return out;
}

// 2x2 agglomeration for domains without an analytic geometry.
bool coarsen(const GridDomain& d, const WeightField* w, GridDomain& out, WeightField& wout) {
  if (d.nx % 2 || d.ny % 2 || d.nx < 4 || d.ny < 4) return false;
  out = GridDomain{};
  out.nx = d.nx / 2;
  out.ny = d.ny / 2;
  out.h = 2 * d.h;
  out.x0 = d.x0;
  out.y0 = d.y0;
  out.labels.assign(static_cast<std::size_t>(out.nx) * out.ny, CellLabel::Outside);
  out.theta.assign(out.labels.size(), {1.0, 1.0, 1.0, 1.0});
  std::vector<double> wv(out.labels.size(), 0.0);
  for (int iy = 0; iy < out.ny; ++iy)
    for (int ix = 0; ix < out.nx; ++ix) {
      bool src = false, snk = false, in = false;
      double acc = 0;
      int cnt = 0;
      for (int k = 0; k < 4; ++k) {
        const int cx = 2 * ix + (k & 1), cy = 2 * iy + (k >> 1);
        const CellLabel l = d.at(cx, cy);
        src |= l == CellLabel::Source;
        snk |= l == CellLabel::Sink;
        in |= l == CellLabel::Interior;
        if (l != CellLabel::Outside && w && !w->fn) {
          acc += w->values[static_cast<std::size_t>(cy) * d.nx + cx];
          ++cnt;
        }
      }
      if (src && snk) return false;
      const std::size_t i = static_cast<std::size_t>(iy) * out.nx + ix;
      out.labels[i] = src ? CellLabel::Source : snk ? CellLabel::Sink : in ? CellLabel::Interior : CellLabel::Outside;
      wv[i] = cnt ? acc / cnt : 1.0;
    }
  wout = WeightField{};
  if (w) {
    if (w->fn) wout.fn = w->fn;
    else wout.values = std::move(wv);
  }
  try {
    validate_domain(out);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

std::shared_ptr<GridGeometry> make_rectangle(double width, double height) {
  positive(width, "width");
  positive(height, "height");
  return std::make_shared<Rectangle>(width, height, std::array<double, 4>{}, false);
}

std::shared_ptr<GridGeometry> make_rectangle_with_obstacle(double width, double height, double x0, double x1,
                                                           double y0, double y1) {
  positive(width, "width");
  positive(height, "height");
  require(x0 < x1 && y0 < y1 && x0 > 0 && x1 < width, ErrorKind::Domain, "obstacle must lie inside the rectangle");
  return std::make_shared<Rectangle>(width, height, std::array<double, 4>{x0, x1, y0, y1}, true);
}

std::shared_ptr<GridGeometry> make_annulus(double r, double R) {
  positive(r, "r");
  require(R > r && std::isfinite(R), ErrorKind::Domain, "annulus needs 0 < r < R");
  return std::make_shared<Annulus>(r, R);
}

std::shared_ptr<GridGeometry> make_sector_annulus(double r, double R, double alpha) {
  positive(r, "r");
  require(R > r && std::isfinite(R), ErrorKind::Domain, "annulus needs 0 < r < R");
  require(alpha > 0 && alpha < kPi, ErrorKind::Domain, "alpha must lie in (0, pi)");
  return std::make_shared<SectorAnnulus>(r, R, alpha);
}

GridDomain discretize(std::shared_ptr<const GridGeometry> geometry, double h) {
  require(static_cast<bool>(geometry), ErrorKind::Config, "missing geometry");
  positive(h, "grid spacing");
  const auto bb = geometry->bbox(h);
  GridDomain d;
  d.h = h;
  d.x0 = bb[0];
  d.y0 = bb[2];
  d.nx = static_cast<int>(std::lround((bb[1] - bb[0]) / h));
  d.ny = static_cast<int>(std::lround((bb[3] - bb[2]) / h));
  require(d.nx >= 3 && d.ny >= 1, ErrorKind::Domain, "grid spacing too coarse for the geometry");
  require(static_cast<double>(d.nx) * d.ny <= 6.5e7, ErrorKind::Config, "grid too large");
  d.labels.resize(static_cast<std::size_t>(d.nx) * d.ny);
  d.theta.assign(d.labels.size(), {1.0, 1.0, 1.0, 1.0});
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) d.labels[static_cast<std::size_t>(iy) * d.nx + ix] = geometry->classify(d.cx(ix), d.cy(iy));

  // Shortley-Weller fractions on edges that cross into a Dirichlet region.
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * d.nx + ix;
      if (d.labels[i] != CellLabel::Interior) continue;
      for (int k = 0; k < 4; ++k) {
        const int jx = ix + kDx[k], jy = iy + kDy[k];
        if (jx < 0 || jy < 0 || jx >= d.nx || jy >= d.ny || !dirichlet(d.at(jx, jy))) continue;
        double lo = 0, hi = 1;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          const CellLabel l = geometry->classify(d.cx(ix) + mid * kDx[k] * h, d.cy(iy) + mid * kDy[k] * h);
          (l == CellLabel::Interior ? lo : hi) = mid;
        }
        d.theta[i][k] = std::max(0.5 * (lo + hi), 1e-3);
      }
    }
  d.geometry = std::move(geometry);
  validate_domain(d);
  return d;
}

GridDomain domain_from_rows(const std::vector<std::string>& rows, double h) {
  positive(h, "grid spacing");
  require(!rows.empty(), ErrorKind::Config, "empty mask");
  GridDomain d;
  d.h = h;
  d.ny = static_cast<int>(rows.size());
  d.nx = static_cast<int>(rows.front().size());
  for (const auto& r : rows) require(static_cast<int>(r.size()) == d.nx, ErrorKind::Config, "mask rows differ in length");
  d.labels.resize(static_cast<std::size_t>(d.nx) * d.ny);
  d.theta.assign(d.labels.size(), {1.0, 1.0, 1.0, 1.0});
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      const char c = rows[static_cast<std::size_t>(d.ny - 1 - iy)][static_cast<std::size_t>(ix)];
      d.labels[static_cast<std::size_t>(iy) * d.nx + ix] = c == '#' ? CellLabel::Interior
                                                           : c == 'S' ? CellLabel::Source
                                                           : c == 'T' ? CellLabel::Sink
                                                                      : CellLabel::Outside;
    }
  validate_domain(d);
  return d;
}

void validate_domain(const GridDomain& d) {
  require(d.nx > 0 && d.ny > 0 && d.labels.size() == static_cast<std::size_t>(d.nx) * d.ny, ErrorKind::Config,
          "malformed grid");
  std::size_t active = 0, src = 0, snk = 0, start = d.labels.size();
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    if (d.labels[i] == CellLabel::Outside) continue;
    ++active;
    src += d.labels[i] == CellLabel::Source;
    snk += d.labels[i] == CellLabel::Sink;
    if (start == d.labels.size()) start = i;
  }
  require(src > 0, ErrorKind::Domain, "domain has no source cells");
  require(snk > 0, ErrorKind::Domain, "domain has no sink cells");
  std::vector<char> seen(d.labels.size(), 0);
  std::queue<std::size_t> q;
  q.push(start);
  seen[start] = 1;
  std::size_t reached = 0;
  while (!q.empty()) {
    const std::size_t i = q.front();
    q.pop();
    ++reached;
    const int ix = static_cast<int>(i % d.nx), iy = static_cast<int>(i / d.nx);
    for (int k = 0; k < 4; ++k) {
      const int jx = ix + kDx[k], jy = iy + kDy[k];
      if (jx < 0 || jy < 0 || jx >= d.nx || jy >= d.ny) continue;
      const std::size_t j = static_cast<std::size_t>(jy) * d.nx + jx;
      if (seen[j] || d.labels[j] == CellLabel::Outside) continue;
      seen[j] = 1;
      q.push(j);
    }
  }
  require(reached == active, ErrorKind::Domain, "active cells are not 4-connected");
}

WeightField WeightField::constant(double c) {
  require(std::isfinite(c) && c >= 1, ErrorKind::Domain, "weight must be finite and >= 1");
  WeightField w;
  w.fn = [c](double, double) { return c; };
  return w;
}

WeightField WeightField::radial(std::function<double(double)> K_of_radius) {
  WeightField w;
  w.fn = [K = std::move(K_of_radius)](double x, double y) { return K(std::hypot(x, y)); };
  return w;
}

CapacityResult grid_energy(const GridDomain& d, const WeightField* weight) {
  const std::vector<double> om = sample_weights(d, weight);
  std::vector<int> index(d.labels.size(), -1);
  int n = 0;
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    if (d.labels[i] == CellLabel::Interior) index[i] = n++;

  auto conductance = [&](std::size_t i, std::size_t j, int k) {
    if (d.labels[j] == CellLabel::Interior) return 0.5 * (om[i] + om[j]);
    return om[i] / d.theta[i][k];
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * d.nx + ix;
      if (index[i] < 0) continue;
      double diag = 0;
      for (int k = 0; k < 4; ++k) {
        const int jx = ix + kDx[k], jy = iy + kDy[k];
        if (jx < 0 || jy < 0 || jx >= d.nx || jy >= d.ny) continue;
        const std::size_t j = static_cast<std::size_t>(jy) * d.nx + jx;
        const CellLabel l = d.labels[j];
        if (l == CellLabel::Outside) continue;
        const double c = conductance(i, j, k);
        diag += c;
        if (l == CellLabel::Interior) trip.emplace_back(index[i], index[j], -c);
        else if (l == CellLabel::Sink) rhs[index[i]] += c;
      }
      trip.emplace_back(index[i], index[i], diag);
    }

  CapacityResult res;
  res.unknowns = static_cast<std::size_t>(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  if (n > 0) {
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(std::max(1000, 4 * n));
    cg.compute(A);
    if (cg.info() != Eigen::Success) fail(ErrorKind::Solver, "preconditioner construction failed");
    u = cg.solveWithGuess(rhs, u);
    if (cg.info() != Eigen::Success) fail(ErrorKind::Solver, "conjugate gradient did not converge");
    res.iterations = static_cast<int>(cg.iterations());
    res.residual = cg.error();
  }

  auto value = [&](std::size_t i) {
    switch (d.labels[i]) {
      case CellLabel::Interior: return u[index[i]];
      case CellLabel::Sink: return 1.0;
      default: return 0.0;
    }
  };
  double E = 0;
  for (int iy = 0; iy < d.ny; ++iy)
    for (int ix = 0; ix < d.nx; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * d.nx + ix;
      const CellLabel li = d.labels[i];
      if (li == CellLabel::Outside) continue;
      for (int k = 0; k < 4; ++k) {
        const int jx = ix + kDx[k], jy = iy + kDy[k];
        if (jx < 0 || jy < 0 || jx >= d.nx || jy >= d.ny) continue;
        const std::size_t j = static_cast<std::size_t>(jy) * d.nx + jx;
        const CellLabel lj = d.labels[j];
        if (lj == CellLabel::Outside) continue;
        const double du = value(i) - value(j);
        if (li == CellLabel::Interior) {
          // Interior pairs are visited twice, Dirichlet edges once from the interior side.
          E += (lj == CellLabel::Interior ? 0.5 : 1.0) * conductance(i, j, k) * du * du;
        } else if (dirichlet(lj) && li != lj && k % 2 == 0) {
          E += 0.5 * (om[i] + om[j]) * du * du;
        }
      }
    }
  res.energy = E;
  res.energy_coarse = std::numeric_limits<double>::quiet_NaN();
  res.extrapolated = E;
  res.bracket.lower = res.bracket.upper = E;
  res.bracket.method = BracketMethod::GridSingle;
  return res;
}

CapacityResult weighted_capacity(const GridDomain& d, const WeightField& weight) {
  validate_domain(d);
  const WeightField* w = &weight;
  CapacityResult fine = grid_energy(d, w);

  GridDomain coarse;
  WeightField wc;
  bool have = false;
  if (d.geometry && w->fn) {
    try {
      coarse = discretize(d.geometry, 2 * d.h);
      have = true;
    } catch (const Error&) {
      have = false;
    }
    wc.fn = w->fn;
  } else {
    have = coarsen(d, w, coarse, wc);
  }
  if (have) {
    const CapacityResult c = grid_energy(coarse, &wc);
    fine.energy_coarse = c.energy;
    fine.extrapolated = 2 * fine.energy - c.energy;
    fine.bracket.lower = std::min(fine.energy, fine.extrapolated);
    fine.bracket.upper = std::max(fine.energy, fine.extrapolated);
    fine.bracket.method = BracketMethod::GridRichardson;
  }
  fine.bracket.lower_inv = 2 * kPi / fine.bracket.upper;
  fine.bracket.upper_inv = 2 * kPi / fine.bracket.lower;
  return fine;
}

CapacityResult capacity(const GridDomain& d) { return weighted_capacity(d, WeightField::constant(1.0)); }

DensityReport log_density_bound_log(double alpha, double log_inv_rbar) {
  require(alpha > 0 && alpha < kPi, ErrorKind::Domain, "alpha must lie in (0, pi)");
  require(std::isfinite(log_inv_rbar) && log_inv_rbar > 0, ErrorKind::Domain, "rbar must lie in (0, 1)");
  const double logC = std::log(2.0) + 2 * kPi;
  DensityReport r;
  r.density = "log_density";
  r.value = (logC + log_inv_rbar) / (2 * kPi - alpha);
  r.params = {{"alpha", alpha}, {"log_inv_rbar", log_inv_rbar}, {"rbar", std::exp(-log_inv_rbar)}};
  r.constants = {{"C", std::exp(logC)}, {"bound_2alpha", (logC + log_inv_rbar) / (2 * kPi - 2 * alpha)}};
  return r;
}

DensityReport log_density_bound(double alpha, double rbar) {
  require(rbar > 0 && rbar < 1, ErrorKind::Domain, "rbar must lie in (0, 1)");
  return log_density_bound_log(alpha, -std::log(rbar));
}

DensityReport dyadic_density_bound_log(double diamU, double log_inv_d) {
  positive(diamU, "diamU");
  require(std::isfinite(log_inv_d), ErrorKind::Domain, "d must be positive and finite");
  const double log2_ratio = (std::log(diamU) + log_inv_d) / std::log(2.0);
  require(log2_ratio > 0, ErrorKind::Domain, "d must be smaller than diamU");
  // Smallest n with n > log2(diamU / d).
  double n = std::floor(log2_ratio) + 1;
  if (n - 1 > log2_ratio) n -= 1;
  DensityReport r;
  r.density = "dyadic";
  r.value = (kPi + 4) * n;
  r.params = {{"diamU", diamU}, {"log_inv_d", log_inv_d}, {"n", n}};
  r.constants = {{"C", kPi + 4}};
  return r;
}

DensityReport dyadic_density_bound(double diamU, double d) {
  positive(d, "d");
  return dyadic_density_bound_log(diamU, -std::log(d));
}

}  // namespace qcml
