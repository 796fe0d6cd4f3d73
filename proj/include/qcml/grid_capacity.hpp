#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qcml/conditional_modulus.hpp"

namespace qcml {

enum class CellLabel : std::uint8_t { Outside = 0, Interior = 1, Source = 2, Sink = 3 };

// Planar region described by a point classifier.  Cells whose centres fall in
// Outside act as insulated obstacles; Source and Sink carry u = 0 and u = 1.
class GridGeometry {
 public:
  virtual ~GridGeometry() = default;
  virtual CellLabel classify(double x, double y) const = 0;
  // Bounding box [x0, x1] x [y0, y1] for spacing h (including any ghost layer).
  virtual std::array<double, 4> bbox(double h) const = 0;
  virtual std::string name() const = 0;
};

// W x H rectangle, Source on x = 0 and Sink on x = W.
std::shared_ptr<GridGeometry> make_rectangle(double width, double height);
// Round annulus r < |z| < R, Source inside, Sink outside.
std::shared_ptr<GridGeometry> make_annulus(double r, double R);
// Annulus minus the sector |arg z| < alpha/2.  Source and Sink are the two
// walls of the removed sector, so the modulus is log(R/r) / (2 pi - alpha).
std::shared_ptr<GridGeometry> make_sector_annulus(double r, double R, double alpha);
// Rectangle as above with an insulated axis-aligned box [x0,x1] x [y0,y1] removed.
std::shared_ptr<GridGeometry> make_rectangle_with_obstacle(double width, double height, double x0, double x1,
                                                           double y0, double y1);

struct GridDomain {
  int nx = 0, ny = 0;
  double h = 1;
  double x0 = 0, y0 = 0;  // lower-left corner of cell (0, 0)
  std::vector<CellLabel> labels;                // row-major, index iy * nx + ix
  std::vector<std::array<double, 4>> theta;     // boundary fraction toward +x, -x, +y, -y
  std::shared_ptr<const GridGeometry> geometry; // set when the domain can be re-discretized

  CellLabel at(int ix, int iy) const { return labels[static_cast<std::size_t>(iy) * nx + ix]; }
  double cx(int ix) const { return x0 + (ix + 0.5) * h; }
  double cy(int iy) const { return y0 + (iy + 0.5) * h; }
};

GridDomain discretize(std::shared_ptr<const GridGeometry> geometry, double h);

// Rows of characters: '#' interior, 'S' source, 'T' sink, anything else outside.
// Row 0 is the top row.
GridDomain domain_from_rows(const std::vector<std::string>& rows, double h);

// Throws DomainError unless Source and Sink are nonempty and the active cells are 4-connected.
void validate_domain(const GridDomain& d);

struct WeightField {
  std::function<double(double, double)> fn;  // preferred: omega(x, y)
  std::vector<double> values;                // per-cell samples for fixed grids
  static WeightField constant(double c);
  static WeightField radial(std::function<double(double)> K_of_radius);
};

struct CapacityResult {
  ModulusBracket bracket;
  double energy = 0;          // Dirichlet energy at spacing h
  double energy_coarse = 0;   // at spacing 2h (NaN when unavailable)
  double extrapolated = 0;    // 2 E_h - E_2h
  int iterations = 0;
  double residual = 0;
  std::size_t unknowns = 0;
};

// Energy of the discrete minimizer at the domain's own spacing.
CapacityResult grid_energy(const GridDomain& d, const WeightField* weight = nullptr);

CapacityResult capacity(const GridDomain& d);
CapacityResult weighted_capacity(const GridDomain& d, const WeightField& weight);

struct DensityReport {
  std::string density;
  double value = 0;
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::pair<std::string, double>> constants;
};

// Integral of rho0 = 1 / ((2 pi - alpha) |z|) squared over
// {rbar / (2 e^{2 pi}) < |z| < 1} minus a sector of opening alpha.
DensityReport log_density_bound(double alpha, double rbar);
// Same, with rbar = e^{-log_inv_rbar}.
DensityReport log_density_bound_log(double alpha, double log_inv_rbar);

// n = smallest integer with 2^n d > diamU and the bound (pi + 4) n.
DensityReport dyadic_density_bound(double diamU, double d);
DensityReport dyadic_density_bound_log(double diamU, double log_inv_d);

}  // namespace qcml
