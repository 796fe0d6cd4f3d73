#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qcml {

using Point = std::array<double, 2>;

// Closed polyline; the last vertex connects back to the first.
class JordanPolyline {
 public:
  JordanPolyline() = default;
  explicit JordanPolyline(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return v_; }
  std::size_t size() const { return v_.size(); }
  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  // Arc length from vertex 0 to vertex i (i == size() gives the total length).
  double arc_at(std::size_t i) const { return cum_[i]; }
  Point point_at(double s) const;
  double signed_area() const;

 private:
  std::vector<Point> v_;
  std::vector<double> cum_;
};

// Sweep over x with bounding-box pruning.  Returns the first crossing pair of
// non-adjacent edges, or {-1, -1} when the polyline is simple.
std::pair<long, long> find_self_intersection(const JordanPolyline& poly);
bool is_simple(const JordanPolyline& poly);

// Regular n-gon inscribed in the unit circle, counterclockwise.
JordanPolyline regular_polygon(std::size_t n);
// Unit circle with the slit [0, 1) traversed on both sides (not simple).
JordanPolyline slit_disk(std::size_t arc_vertices, std::size_t slit_vertices);

enum class SampleMode { Vertices, ArcLength, Jittered };

struct ThreePointOptions {
  double C = 1;
  std::size_t samples = 2000;
  SampleMode mode = SampleMode::Vertices;
  std::uint64_t seed = 1;
  double slack = 0;  // pass when worst_ratio <= 1 + slack
};

struct ThreePointReport {
  double worst_ratio = 0;        // with the lower arc-diameter estimate
  double worst_ratio_upper = 0;  // with twice the lower estimate
  Point witness_x{}, witness_y{};
  double witness_distance = 0;
  double witness_diameter = 0;
  bool pass = false;       // worst_ratio <= 1
  bool certified = false;  // worst_ratio_upper <= 1
  double approximation_factor = 2;
  double required_scale = 0;  // smallest C for which every sampled pair certifies
  std::size_t samples_used = 0;
};

ThreePointReport three_point_check(const JordanPolyline& boundary, const std::function<double(double)>& h,
                                   const ThreePointOptions& opt);

// t * log^kappa(1 + 1/t).
std::function<double(double)> log_power_control(double kappa);

// ---------------------------------------------------------------------------

enum class ProfileKind { LogPower, Power };

struct SnakeParams {
  ProfileKind kind = ProfileKind::LogPower;
  double epsilon = 0.1;  // LogPower
  double s = 0.5;        // Power
  double c = 0.125;
  double alpha = 1.5707963267948966;
  double r_min = 1e-4;
  int tubes_per_decade = 1;  // each straight wall edge is split into this many pieces

  double width(double r) const;
};

struct Tube {
  double r;   // right abscissa r_n
  double w;   // width w_n
  double y0;  // straight section [y0, y1]
  double y1;
};

struct SnakeGeometry {
  SnakeParams params;
  JordanPolyline boundary;
  std::vector<Tube> tubes;
  std::size_t wall_begin = 0;  // vertex range of the tunnel walls in the boundary
  std::size_t wall_end = 0;
  // Boundary vertex indices of the tunnel walls that lie in tubes with r_n <= rbar.
  std::pair<std::size_t, std::size_t> tip_range(double rbar) const;
};

SnakeGeometry build_snake(const SnakeParams& params);

double preimage_diam_exponent(double K, double alpha);

struct UpperBoundReport {
  double value = 0;
  double log_inv_d = 0;  // d = rbar^exponent
  double exponent = 0;
  double n = 0;          // dyadic count, exp mode
  double budget_term = 0;
  double geometric_term = 0;
  double C_p = 0;        // Lp mode
};

UpperBoundReport upper_bound_weighted_modulus_exp(double log_inv_rbar, double K, double p, double alpha, double I_exp);
UpperBoundReport upper_bound_weighted_modulus_Lp(double log_inv_rbar, double K, double p, double alpha, double I_p);

// Integral of the lower density squared over the straight tube sections with r_n > rbar.
double tunnel_lower_modulus(const SnakeGeometry& geometry, double rbar);
double tube_integral(const SnakeParams& params, const Tube& tube);

// Asymptotic model of tunnel_lower_modulus as a function of L = log(1/rbar).
struct LowerModel {
  ProfileKind kind;
  double C_l = 0;
  double exponent = 0;  // 2 + 2 eps (power of L) or 2/s - 2 (rate in L)
  double log_value(double L) const;
};
LowerModel lower_model(const SnakeParams& params);

enum class CrossoverMode { Exp, Lp };

struct CrossoverReport {
  double log_inv_rbar_star = 0;
  double log_lower_at = 0;
  double log_upper_at = 0;
  double closed_form_log_inv = 0;  // leading-order prediction
  double C_l = 0;
  double C_u = 0;
};

CrossoverReport crossover(const SnakeParams& params, double K, double p, CrossoverMode mode, double budget);

double exponent_threshold(double s);
// Threshold including the sector correction: p must exceed exponent * s / (1 - s).
double exponent_threshold_alpha(double s, double K, double alpha);

}  // namespace qcml
