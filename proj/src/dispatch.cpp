#include "qcml/dispatch.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qcml/conditional_modulus.hpp"
#include "qcml/cusp_regularity.hpp"
#include "qcml/errors.hpp"
#include "qcml/finite_distortion_maps.hpp"
#include "qcml/gauge.hpp"
#include "qcml/grid_capacity.hpp"
#include "qcml/snake_domain.hpp"

namespace qcml {

namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::Config, what); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '_' || c == '-'; }), s.end());
  return s;
}

// Non-finite doubles become strings; everything else stays numeric.
json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

// Typed access to a JSON object that remembers which keys were read, so
// leftover keys can be reported as schema violations.
class Params {
 public:
  Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) config_error(where_ + " must be a JSON object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  const json& raw(const std::string& k) {
    if (!j_.contains(k)) config_error(where_ + ": missing parameter '" + k + "'");
    used_.insert(k);
    return j_.at(k);
  }

  double number(const std::string& k) {
    const json& v = raw(k);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      try {
        std::size_t pos = 0;
        const double d = std::stod(s, &pos);
        if (pos == s.size()) return d;
      } catch (const std::exception&) {
      }
    }
    config_error(where_ + ": parameter '" + k + "' must be a number");
  }
  double number(const std::string& k, double def) { return has(k) ? number(k) : def; }

  long integer(const std::string& k) {
    const double d = number(k);
    if (d != std::floor(d) || std::fabs(d) > 9e15) config_error(where_ + ": parameter '" + k + "' must be an integer");
    return long(d);
  }
  long integer(const std::string& k, long def) { return has(k) ? integer(k) : def; }

  std::string text(const std::string& k) {
    const json& v = raw(k);
    if (!v.is_string()) config_error(where_ + ": parameter '" + k + "' must be a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& k, const std::string& def) { return has(k) ? text(k) : def; }

  bool flag(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number()) return v.get<double>() != 0;
    if (v.is_string()) {
      const std::string s = lower(v.get<std::string>());
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
    }
    config_error(where_ + ": parameter '" + k + "' must be a boolean");
  }

  // Radius as a plain number r or {"log_inv": L} with r = e^{-L}; returns L.
  double log_inv(const std::string& k) {
    const json& v = raw(k);
    return log_inv_of(v, k);
  }
  double log_inv(const std::string& k, double def_log_inv) { return has(k) ? log_inv(k) : def_log_inv; }

  double log_inv_of(const json& v, const std::string& k) const {
    if (v.is_object()) {
      if (v.size() != 1 || !v.contains("log_inv") || !v.at("log_inv").is_number())
        config_error(where_ + ": radius '" + k + "' must be a number or {\"log_inv\": L}");
      return v.at("log_inv").get<double>();
    }
    if (!v.is_number()) config_error(where_ + ": radius '" + k + "' must be a number or {\"log_inv\": L}");
    const double r = v.get<double>();
    if (!(r > 0)) fail(ErrorKind::Domain, where_ + ": radius '" + k + "' must be positive");
    return -std::log(r);
  }

  std::vector<double> numbers(const std::string& k) {
    const json& v = raw(k);
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) config_error(where_ + ": parameter '" + k + "' must be a number or an array");
    for (const auto& e : v) {
      if (!e.is_number()) config_error(where_ + ": parameter '" + k + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Params sub(const std::string& k) { return Params(raw(k), where_ + "." + k); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) config_error(where_ + ": unknown parameter '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

struct Report {
  json outputs = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json constants = json::object();
  json extra = json::object();  // additional structured output (JSON only)
};

// ---------------------------------------------------------------------------
// Parsers for shared parameter objects.

Gauge parse_gauge(Params g) {
  const std::string kind = lower(g.text("kind"));
  Gauge out = Gauge::exponential(1);
  if (kind == "exponential") {
    out = Gauge::exponential(g.number("p"));
  } else if (kind == "powerexponential") {
    out = Gauge::power_exponential(g.number("p"), g.number("alpha"));
  } else if (kind == "subexponentiallog") {
    out = Gauge::sub_exponential_log(g.number("p"), g.number("beta", 1.0), g.number("offset", 0.0));
  } else if (kind == "powerlp") {
    out = Gauge::power_lp(g.number("p"));
  } else if (kind == "tabulated") {
    const json& s = g.raw("samples");
    std::vector<std::pair<double, double>> samples;
    if (!s.is_array()) config_error("gauge.samples must be an array of [x, psi] pairs");
    for (const auto& e : s) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        config_error("gauge.samples must be an array of [x, psi] pairs");
      samples.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    out = Gauge::tabulated(samples);
  } else {
    config_error("unknown gauge kind '" + kind + "'");
  }
  g.finish();
  return out;
}

json gauge_echo(const Gauge& g) {
  json j{{"kind", gauge_kind_name(g.kind())}};
  switch (g.kind()) {
    case GaugeKind::Exponential:
    case GaugeKind::PowerLp: j["p"] = g.p(); break;
    case GaugeKind::PowerExponential: j["p"] = g.p(); j["alpha"] = g.alpha(); break;
    case GaugeKind::SubExponentialLog:
      j["p"] = g.p();
      j["beta"] = g.beta();
      j["offset"] = g.offset();
      break;
    case GaugeKind::Tabulated: j["samples"] = g.samples().size(); break;
  }
  return j;
}

SnakeParams parse_snake(Params& p) {
  SnakeParams s;
  const std::string prof = lower(p.text("profile", "LogPower"));
  if (prof == "logpower")
    s.kind = ProfileKind::LogPower;
  else if (prof == "power")
    s.kind = ProfileKind::Power;
  else
    config_error("unknown snake profile '" + prof + "'");
  s.epsilon = p.number("epsilon", s.epsilon);
  s.s = p.number("s", s.s);
  s.c = p.number("c", s.c);
  s.alpha = p.number("alpha", s.alpha);
  s.r_min = std::exp(-p.log_inv("r_min", -std::log(s.r_min)));
  s.tubes_per_decade = int(p.integer("tubes_per_decade", s.tubes_per_decade));
  return s;
}

RadialMap parse_map(Params m) {
  Params eta = m.sub("eta");
  const double gamma = m.number("gamma", 0.0);
  const std::string kind = lower(eta.text("kind"));
  RadialMap out = RadialMap::identity();
  if (kind == "powerstretch") {
    out = RadialMap::power_stretch(eta.number("K"), gamma);
  } else if (kind == "identity") {
    out = RadialMap::identity(gamma);
  } else if (kind == "subexpexample") {
    out = RadialMap::sub_exp_example(eta.number("p"), eta.number("eps"), gamma);
  } else if (kind == "tabulated") {
    const json& s = eta.raw("samples");
    std::vector<std::pair<double, double>> samples;
    if (!s.is_array()) config_error("eta.samples must be an array of [r, eta] pairs");
    for (const auto& e : s) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        config_error("eta.samples must be an array of [r, eta] pairs");
      samples.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    out = RadialMap::tabulated(samples, gamma);
  } else {
    config_error("unknown map kind '" + kind + "'");
  }
  eta.finish();
  m.finish();
  return out;
}

SampleMode parse_mode(const std::string& s) {
  const std::string m = lower(s);
  if (m == "vertices") return SampleMode::Vertices;
  if (m == "arclength") return SampleMode::ArcLength;
  if (m == "jittered") return SampleMode::Jittered;
  config_error("unknown sample mode '" + s + "'");
}

std::function<double(double)> parse_control(Params c) {
  const std::string kind = lower(c.text("kind", "identity"));
  std::function<double(double)> h;
  if (kind == "identity")
    h = [](double t) { return t; };
  else if (kind == "logpower")
    h = log_power_control(c.number("kappa"));
  else
    config_error("unknown control kind '" + kind + "'");
  c.finish();
  return h;
}

// PGM mask: 0 outside, 255 interior, 64 source, 128 sink.
std::vector<std::string> read_pgm_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open mask '" + path + "'");
  auto token = [&]() {
    std::string t;
    while (in >> std::ws && in.peek() == '#') std::getline(in, t);
    in >> t;
    return t;
  };
  const std::string magic = token();
  if (magic != "P2" && magic != "P5") config_error("mask '" + path + "' is not a P2/P5 PGM file");
  long w = 0, hgt = 0, maxv = 0;
  try {
    w = std::stol(token());
    hgt = std::stol(token());
    maxv = std::stol(token());
  } catch (const std::exception&) {
    config_error("mask '" + path + "' has a malformed header");
  }
  if (w <= 0 || hgt <= 0 || maxv != 255) config_error("mask '" + path + "' must be 8-bit with maxval 255");
  std::vector<std::string> rows(hgt, std::string(w, '.'));
  if (magic == "P5") in.get();
  for (long y = 0; y < hgt; ++y)
    for (long x = 0; x < w; ++x) {
      int v;
      if (magic == "P5") {
        const int c = in.get();
        if (c == EOF) config_error("mask '" + path + "' is truncated");
        v = c;
      } else {
        const std::string t = token();
        if (t.empty()) config_error("mask '" + path + "' is truncated");
        v = std::stoi(t);
      }
      switch (v) {
        case 0: break;
        case 255: rows[y][x] = '#'; break;
        case 64: rows[y][x] = 'S'; break;
        case 128: rows[y][x] = 'T'; break;
        default: config_error("mask '" + path + "' contains label value " + std::to_string(v));
      }
    }
  return rows;
}

GridDomain parse_domain(Params d) {
  const double h = d.number("h");
  GridDomain out;
  if (d.has("geometry")) {
    Params g = d.sub("geometry");
    const std::string kind = lower(g.text("kind"));
    std::shared_ptr<GridGeometry> geo;
    if (kind == "rectangle")
      geo = make_rectangle(g.number("width"), g.number("height"));
    else if (kind == "annulus")
      geo = make_annulus(g.number("r"), g.number("R"));
    else if (kind == "sectorannulus")
      geo = make_sector_annulus(g.number("r"), g.number("R"), g.number("alpha"));
    else if (kind == "rectanglewithobstacle")
      geo = make_rectangle_with_obstacle(g.number("width"), g.number("height"), g.number("x0"), g.number("x1"),
                                         g.number("y0"), g.number("y1"));
    else
      config_error("unknown grid geometry '" + kind + "'");
    g.finish();
    out = discretize(geo, h);
  } else if (d.has("rows")) {
    const json& r = d.raw("rows");
    if (!r.is_array()) config_error("domain.rows must be an array of strings");
    std::vector<std::string> rows;
    for (const auto& e : r) {
      if (!e.is_string()) config_error("domain.rows must be an array of strings");
      rows.push_back(e.get<std::string>());
    }
    out = domain_from_rows(rows, h);
  } else if (d.has("pgm")) {
    out = domain_from_rows(read_pgm_rows(d.text("pgm")), h);
  } else {
    config_error("domain needs one of 'geometry', 'rows' or 'pgm'");
  }
  d.finish();
  return out;
}

std::vector<json> bracket_row(const ModulusBracket& b, double log_inv_r, double log_inv_R) {
  return {bracket_method_name(b.method), num(std::exp(-log_inv_r)), num(std::exp(-log_inv_R)), num(b.lower),
          num(b.upper),  num(0.5 * (b.lower + b.upper)), num(b.lower_inv), num(b.upper_inv),
          num(b.upper_inv - b.lower_inv)};
}

const std::vector<std::string> kBracketColumns = {"method", "r", "R", "lower", "upper", "value",
                                                  "lower_inv", "upper_inv", "gap_inv"};

// ---------------------------------------------------------------------------
// Commands.

Report run_gauge(const std::string& action, Params& p) {
  Report rep;
  const Gauge g = parse_gauge(p.sub("gauge"));
  rep.outputs["gauge"] = gauge_echo(g);
  if (action == "eval") {
    rep.columns = {"x", "psi", "log_psi", "dlog_psi"};
    for (double x : p.numbers("x"))
      rep.rows.push_back({num(x), num(g.eval(x)), num(g.log_gauge(x)), num(g.log_gauge_derivative(x))});
  } else if (action == "inverse") {
    const double y = p.number("y");
    rep.outputs["x"] = num(g.inverse(y));
  } else if (action == "cavitation") {
    const CavitationReport c = cavitation_test(g);
    rep.outputs["verdict"] = c.verdict == Cavitation::Divergent ? "Divergent" : "Convergent";
    rep.outputs["analytic"] = c.analytic;
    rep.outputs["integral"] = num(c.integral);
    rep.columns = {"k", "horizon", "increment", "ratio"};
    for (std::size_t k = 0; k < c.horizons.size(); ++k)
      rep.rows.push_back({json(k), num(c.horizons[k]), num(k < c.increments.size() ? c.increments[k] : NAN),
                          num(k < c.ratios.size() ? c.ratios[k] : NAN)});
  } else {
    config_error("unknown gauge action '" + action + "'");
  }
  return rep;
}

Report run_modulus(const std::string& action, Params& p) {
  Report rep;
  const Gauge g = parse_gauge(p.sub("gauge"));
  rep.outputs["gauge"] = gauge_echo(g);
  if (action == "bracket" || action == "profile") {
    const DistortionBudget budget(p.number("I"));
    const ShellRange shells{int(p.integer("m")), int(p.integer("n"))};
    rep.constants["I0"] = num(budget.I0());
    if (action == "bracket") {
      const ModulusBracket b = conditional_modulus_bracket(g, budget, shells);
      rep.columns = kBracketColumns;
      rep.rows.push_back(bracket_row(b, shells.n, shells.m));
    } else {
      const ShellProfile prof = extremal_profile(g, budget, shells);
      rep.outputs["objective"] = num(prof.objective);
      rep.outputs["log_multiplier"] = num(prof.log_multiplier);
      rep.outputs["stationarity_residual"] = num(prof.stationarity_residual);
      rep.outputs["budget_residual"] = num(prof.budget_residual);
      rep.columns = {"j", "b", "a", "K", "capped"};
      for (std::size_t i = 0; i < prof.b.size(); ++i)
        rep.rows.push_back({json(prof.m + 1 + long(i)), num(prof.b[i]), num(prof.a[i]), num(prof.K[i]),
                            json(bool(prof.capped[i]))});
    }
  } else if (action == "asymptotic" || action == "closedform") {
    const AnnulusSpec a = AnnulusSpec::from_log(p.log_inv("r"), p.log_inv("R", 0.0));
    const double inv = action == "asymptotic" ? asymptotic_inverse_modulus(g, a) : closed_form_inverse_modulus(g, a);
    rep.outputs["log_inv_r"] = num(a.log_inv_r);
    rep.outputs["log_inv_R"] = num(a.log_inv_R);
    rep.outputs["inverse_modulus"] = num(inv);
    rep.outputs["modulus"] = num(2 * kPi / inv);
    rep.columns = {"method", "log_inv_r", "log_inv_R", "inverse_modulus", "modulus"};
    rep.rows.push_back({action == "asymptotic" ? "Asymptotic" : "ClosedForm", num(a.log_inv_r), num(a.log_inv_R),
                        num(inv), num(2 * kPi / inv)});
  } else if (action == "errorbound") {
    const DistortionBudget budget(p.number("I"));
    const int m = int(p.integer("m"));
    rep.outputs["error_bound"] = num(asymptotic_error_bound(g, budget, m));
    rep.constants["I0"] = num(budget.I0());
  } else {
    config_error("unknown modulus action '" + action + "'");
  }
  return rep;
}

json density_json(const DensityReport& d, Report& rep) {
  for (const auto& [k, v] : d.constants) rep.constants[k] = num(v);
  json params = json::object();
  for (const auto& [k, v] : d.params) params[k] = num(v);
  return params;
}

Report run_grid(const std::string& action, Params& p) {
  Report rep;
  if (action == "capacity") {
    const GridDomain d = parse_domain(p.sub("domain"));
    CapacityResult r;
    if (p.has("weight")) {
      Params w = p.sub("weight");
      const std::string kind = lower(w.text("kind"));
      WeightField field;
      if (kind == "constant") {
        field = WeightField::constant(w.number("c"));
      } else if (kind == "radial") {
        // K(rho) = sum_i coefficients[i] rho^i
        const std::vector<double> coef = w.numbers("coefficients");
        field = WeightField::radial([coef](double rho) {
          double v = 0;
          for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * rho + *it;
          return v;
        });
      } else {
        config_error("unknown weight kind '" + kind + "'");
      }
      w.finish();
      r = weighted_capacity(d, field);
    } else {
      r = capacity(d);
    }
    rep.outputs["nx"] = d.nx;
    rep.outputs["ny"] = d.ny;
    rep.outputs["h"] = num(d.h);
    rep.outputs["energy"] = num(r.energy);
    rep.outputs["energy_coarse"] = num(r.energy_coarse);
    rep.outputs["extrapolated"] = num(r.extrapolated);
    rep.outputs["iterations"] = r.iterations;
    rep.outputs["residual"] = num(r.residual);
    rep.outputs["unknowns"] = r.unknowns;
    rep.columns = {"method", "lower", "upper", "energy", "extrapolated"};
    rep.rows.push_back({bracket_method_name(r.bracket.method), num(r.bracket.lower), num(r.bracket.upper),
                        num(r.energy), num(r.extrapolated)});
  } else if (action == "density") {
    const DensityReport d = log_density_bound_log(p.number("alpha"), p.log_inv("rbar"));
    rep.outputs["density"] = d.density;
    rep.outputs["value"] = num(d.value);
    rep.outputs["params"] = density_json(d, rep);
  } else if (action == "dyadic") {
    const DensityReport d = dyadic_density_bound_log(p.number("diamU"), p.log_inv("d"));
    rep.outputs["density"] = d.density;
    rep.outputs["value"] = num(d.value);
    rep.outputs["params"] = density_json(d, rep);
  } else {
    config_error("unknown grid action '" + action + "'");
  }
  return rep;
}

void three_point_outputs(const ThreePointReport& t, Report& rep) {
  rep.outputs["worst_ratio"] = num(t.worst_ratio);
  rep.outputs["worst_ratio_upper"] = num(t.worst_ratio_upper);
  rep.outputs["witness_x"] = {num(t.witness_x[0]), num(t.witness_x[1])};
  rep.outputs["witness_y"] = {num(t.witness_y[0]), num(t.witness_y[1])};
  rep.outputs["witness_distance"] = num(t.witness_distance);
  rep.outputs["witness_diameter"] = num(t.witness_diameter);
  rep.outputs["pass"] = t.pass;
  rep.outputs["certified"] = t.certified;
  rep.outputs["approximation_factor"] = num(t.approximation_factor);
  rep.outputs["required_scale"] = num(t.required_scale);
  rep.outputs["samples_used"] = t.samples_used;
}

ThreePointOptions parse_three_point_options(Params& p, std::uint64_t seed) {
  ThreePointOptions o;
  o.C = p.number("C", 1.0);
  o.samples = std::size_t(p.integer("samples", 2000));
  o.mode = parse_mode(p.text("mode", "vertices"));
  o.seed = std::uint64_t(p.integer("seed", long(seed)));
  o.slack = p.number("slack", 0.0);
  return o;
}

Report run_snake(const std::string& action, Params& p, std::uint64_t seed) {
  Report rep;
  if (action == "threshold") {
    const double s = p.number("s");
    rep.outputs["value"] = num(exponent_threshold(s));
    if (p.has("K") || p.has("alpha")) rep.outputs["value_alpha"] = num(exponent_threshold_alpha(s, p.number("K"), p.number("alpha")));
    return rep;
  }
  const SnakeParams sp = parse_snake(p);
  if (action == "build") {
    const SnakeGeometry g = build_snake(sp);
    rep.outputs["vertices"] = g.boundary.size();
    rep.outputs["tubes"] = g.tubes.size();
    rep.outputs["length"] = num(g.boundary.length());
    rep.columns = {"r_n", "w_n", "y0", "y1"};
    for (const Tube& t : g.tubes) rep.rows.push_back({num(t.r), num(t.w), num(t.y0), num(t.y1)});
    json verts = json::array();
    for (const Point& v : g.boundary.vertices()) verts.push_back({num(v[0]), num(v[1])});
    rep.extra["vertices"] = std::move(verts);
  } else if (action == "threepoint") {
    const SnakeGeometry g = build_snake(sp);
    const auto h = log_power_control(p.number("kappa", 0.65));
    const ThreePointOptions o = parse_three_point_options(p, seed);
    three_point_outputs(three_point_check(g.boundary, h, o), rep);
    rep.constants["C"] = num(o.C);
  } else if (action == "crossover" || action == "bounds") {
    const double K = p.number("K");
    const double pp = p.number("p");
    const std::string mode_s = lower(p.text("mode", sp.kind == ProfileKind::LogPower ? "exp" : "lp"));
    if (mode_s != "exp" && mode_s != "lp") config_error("mode must be 'exp' or 'lp'");
    const CrossoverMode mode = mode_s == "exp" ? CrossoverMode::Exp : CrossoverMode::Lp;
    const double budget = p.number("budget", 1.0);
    if (action == "crossover") {
      const CrossoverReport c = crossover(sp, K, pp, mode, budget);
      rep.outputs["log_inv_rbar_star"] = num(c.log_inv_rbar_star);
      rep.outputs["log_lower_at"] = num(c.log_lower_at);
      rep.outputs["log_upper_at"] = num(c.log_upper_at);
      rep.outputs["closed_form_log_inv"] = num(c.closed_form_log_inv);
      rep.constants["C_l"] = num(c.C_l);
      rep.constants["C_u"] = num(c.C_u);
    } else {
      const LowerModel low = lower_model(sp);
      rep.constants["C_l"] = num(low.C_l);
      rep.columns = {"log_inv_rbar", "log_lower", "log_upper", "exponent", "log_inv_d"};
      for (double L : p.numbers("log_inv_rbar")) {
        const UpperBoundReport u = mode == CrossoverMode::Exp
                                       ? upper_bound_weighted_modulus_exp(L, K, pp, sp.alpha, budget)
                                       : upper_bound_weighted_modulus_Lp(L, K, pp, sp.alpha, budget);
        rep.rows.push_back({num(L), num(low.log_value(L)), num(std::log(u.value)), num(u.exponent), num(u.log_inv_d)});
      }
    }
  } else if (action == "lower") {
    const SnakeGeometry g = build_snake(sp);
    rep.columns = {"rbar", "lower"};
    for (double rbar : p.numbers("rbar")) rep.rows.push_back({num(rbar), num(tunnel_lower_modulus(g, rbar))});
  } else {
    config_error("unknown snake action '" + action + "'");
  }
  return rep;
}

Report run_threepoint(const std::string& action, Params& p, std::uint64_t seed) {
  if (action != "check") config_error("unknown threepoint action '" + action + "'");
  Report rep;
  Params c = p.sub("curve");
  const std::string kind = lower(c.text("kind"));
  JordanPolyline curve;
  if (kind == "polygon") {
    curve = regular_polygon(std::size_t(c.integer("n")));
  } else if (kind == "slit") {
    curve = slit_disk(std::size_t(c.integer("arc")), std::size_t(c.integer("slit")));
  } else if (kind == "vertices") {
    std::vector<Point> v;
    const json& arr = c.raw("vertices");
    if (!arr.is_array()) config_error("curve.vertices must be an array of [x, y] pairs");
    for (const auto& e : arr) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        config_error("curve.vertices must be an array of [x, y] pairs");
      v.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    curve = JordanPolyline(v);
  } else if (kind == "snake") {
    curve = build_snake(parse_snake(c)).boundary;
  } else {
    config_error("unknown curve kind '" + kind + "'");
  }
  c.finish();
  const auto h = p.has("control") ? parse_control(p.sub("control")) : std::function<double(double)>([](double t) { return t; });
  const ThreePointOptions o = parse_three_point_options(p, seed);
  rep.outputs["simple"] = is_simple(curve);
  three_point_outputs(three_point_check(curve, h, o), rep);
  rep.constants["C"] = num(o.C);
  return rep;
}

Report run_map(const std::string& action, Params& p) {
  Report rep;
  if (action == "bounds") {
    const double K = p.number("K"), pp = p.number("p"), c = p.number("c");
    const double v = p.has("log_ell") ? lower_exponent_bound_log(K, pp, c, p.number("log_ell"))
                                      : lower_exponent_bound(K, pp, c, p.number("ell"));
    rep.outputs["value"] = num(v);
    rep.outputs["limit"] = num(2 * K);
    return rep;
  }
  const RadialMap m = parse_map(p.sub("map"));
  rep.outputs["map"] = radial_kind_name(m.kind());
  if (action == "distortion") {
    const DistortionProfile prof = distortion(m);
    rep.columns = {"log_inv_r", "K", "log_eta"};
    std::vector<double> Ls;
    if (p.has("r")) {
      const json& rv = p.raw("r");
      if (rv.is_array())
        for (const auto& e : rv) Ls.push_back(p.log_inv_of(e, "r"));
      else
        Ls.push_back(p.log_inv_of(rv, "r"));
    } else {
      for (int k = 0; k <= 40; ++k) Ls.push_back(0.5 * k + 0.05);
    }
    for (double L : Ls) rep.rows.push_back({num(L), num(prof.at_log(L)), num(m.log_eta_at_log(L))});
  } else if (action == "integrability") {
    const Gauge g = parse_gauge(p.sub("gauge"));
    const IntegrabilityVerdict v = integrability_class(distortion(m), g, int(p.integer("shells", 2000)));
    rep.outputs["gauge"] = gauge_echo(g);
    rep.outputs["verdict"] = integrability_name(v.verdict);
    rep.outputs["shell_exponent"] = num(v.shell_exponent);
    rep.outputs["probe_k"] = num(v.probe_k);
    rep.outputs["analytic_shell_exponent"] = num(v.analytic_shell_exponent);
    rep.outputs["critical_eps"] = num(v.critical_eps);
    rep.columns = {"k", "log_partial_sum"};
    for (std::size_t k = 0; k < v.log_partial_sums.size(); ++k) rep.rows.push_back({json(k), num(v.log_partial_sums[k])});
  } else if (action == "winding") {
    const double L = p.log_inv("r");
    const double L_out = p.log_inv("r_outer", 0.0);
    const bool all = p.flag("max", false);
    const double theta = p.number("theta", 0.0);
    const double w = all ? winding_max(m, std::exp(-L), int(p.integer("directions", 64)))
                         : winding_log(m, theta, L, L_out);
    rep.outputs["winding"] = num(w);
    rep.outputs["log_inv_r"] = num(L);
  } else if (action == "comparator") {
    Params b = p.sub("bound");
    const std::string kind = lower(b.text("kind"));
    ContinuityBound bound;
    if (kind == "powerlower")
      bound = ContinuityBound::power_lower(b.number("K"), b.number("eps"));
    else if (kind == "subexplower")
      bound = ContinuityBound::sub_exp_lower(b.number("c"));
    else
      config_error("unknown bound kind '" + kind + "'");
    b.finish();
    const ComparatorReport c = continuity_comparator(m, bound, p.number("r_lo", 1e-12), p.number("r_hi", 1e-1),
                                                     std::size_t(p.integer("points", 2001)));
    rep.outputs["holds_on_grid"] = c.holds_on_grid;
    rep.outputs["first_violation"] = num(c.first_violation);
    rep.outputs["log_best_c0"] = num(c.log_best_c0);
    rep.outputs["violations"] = c.violations;
    rep.outputs["grid_points"] = c.grid_points;
    rep.outputs["crossing_log_inv"] = num(c.crossing_log_inv);
  } else if (action == "rotation") {
    const RotationReport r = rotation_bound_check(m, p.number("K"), p.number("c", 1.0), int(p.integer("k_lo", 5)),
                                                  int(p.integer("k_hi", 40)));
    rep.outputs["pass"] = r.pass;
    rep.outputs["within_benchmark"] = r.within_benchmark;
    rep.outputs["measured_K"] = num(r.measured_K);
    rep.constants["K"] = num(r.K);
    rep.constants["c"] = num(r.c);
    rep.columns = {"k", "winding", "bound", "benchmark"};
    for (const auto& row : r.rows) rep.rows.push_back({row.k, num(row.winding), num(row.bound), num(row.benchmark)});
  } else {
    config_error("unknown map action '" + action + "'");
  }
  return rep;
}

Report run_cusp(const std::string& action, Params& p) {
  Report rep;
  if (action == "verdict") {
    const WeightFunction phi = WeightFunction::power_log(p.number("a", 2.0), p.number("q"));
    const ContinuityGauge g = ContinuityGauge::log_power(p.number("p"), p.number("Cc", 1.0));
    const CuspIntegralReport r = phi_psiprime_integral(phi, g, std::exp(-p.log_inv("t_floor", -std::log(1e-3))),
                                                       int(p.integer("horizon", 5000)));
    rep.outputs["verdict"] = integrability_name(r.verdict);
    rep.outputs["partial"] = num(r.partial);
    rep.outputs["log_partial"] = num(r.log_partial);
    rep.outputs["tail_exponent"] = num(r.tail_exponent);
    rep.outputs["probe_k"] = num(r.probe_k);
  } else if (action == "critical") {
    const double pp = p.number("p");
    rep.outputs["value"] = num(critical_exponent(pp));
    if (p.flag("search", true)) {
      const CriticalSearch s = critical_exponent_search(pp, p.number("a", 2.0), p.number("Cc", 1.0));
      rep.outputs["bisection_estimate"] = num(s.estimate);
      rep.outputs["bisection_lo"] = num(s.lo);
      rep.outputs["bisection_hi"] = num(s.hi);
    }
  } else if (action == "doubling") {
    const WeightFunction phi = WeightFunction::power_log(p.number("a", 2.0), p.number("q"));
    rep.columns = {"lambda", "observed", "analytic", "certified"};
    for (const auto& r : doubling_check(phi, p.numbers("lambdas")))
      rep.rows.push_back({num(r.lambda), num(r.observed), num(r.analytic), json(r.certified)});
  } else {
    config_error("unknown cusp action '" + action + "'");
  }
  return rep;
}

std::string csv_cell(const json& v) {
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

std::string render_csv(const Report& rep) {
  std::ostringstream out;
  if (!rep.columns.empty()) {
    for (std::size_t i = 0; i < rep.columns.size(); ++i) out << (i ? "," : "") << rep.columns[i];
    out << "\n";
    for (const auto& row : rep.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
      out << "\n";
    }
  } else {
    out << "key,value\n";
    for (auto it = rep.outputs.begin(); it != rep.outputs.end(); ++it)
      if (!it->is_object() && !it->is_array()) out << it.key() << "," << csv_cell(*it) << "\n";
  }
  return out.str();
}

}  // namespace

const char* version() noexcept { return "0.1.0"; }

DispatchResult dispatch(const std::string& config_json) {
  DispatchResult res;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    json cfg;
    try {
      cfg = json::parse(config_json);
    } catch (const json::parse_error& e) {
      config_error(std::string("configuration is not valid JSON: ") + e.what());
    }
    Params top(cfg, "config");
    const std::string command = top.text("command");
    const std::string action = lower(top.text("action", ""));
    const json params = top.has("params") ? top.raw("params") : json::object();
    const std::string format = lower(top.text("format", "json"));
    const std::string output = top.text("output", "");
    const long seed = top.integer("seed", 0);
    const bool timing = top.flag("timing", false);
    top.finish();
    if (format != "json" && format != "csv") config_error("format must be 'json' or 'csv'");
    if (seed < 0) config_error("seed must be >= 0");

    Params p(params, "params");
    Report rep;
    if (command == "gauge")
      rep = run_gauge(action, p);
    else if (command == "modulus")
      rep = run_modulus(action, p);
    else if (command == "grid")
      rep = run_grid(action, p);
    else if (command == "snake")
      rep = run_snake(action, p, std::uint64_t(seed));
    else if (command == "threepoint")
      rep = run_threepoint(action.empty() ? "check" : action, p, std::uint64_t(seed));
    else if (command == "map")
      rep = run_map(action, p);
    else if (command == "cusp")
      rep = run_cusp(action, p);
    else
      config_error("unknown subcommand '" + command + "'");
    p.finish();

    json out{{"schema", 1},
             {"tool", "qcml"},
             {"version", version()},
             {"command", command},
             {"action", action},
             {"seed", seed},
             {"inputs", params},
             {"outputs", rep.outputs},
             {"constants", rep.constants}};
    if (!rep.columns.empty()) {
      out["columns"] = rep.columns;
      out["rows"] = rep.rows;
    }
    for (auto it = rep.extra.begin(); it != rep.extra.end(); ++it) out[it.key()] = *it;
    if (timing)
      out["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.json = out.dump(2) + "\n";
    res.csv = render_csv(rep);
    if (!output.empty()) {
      std::ofstream f(output, std::ios::binary);
      if (!f) config_error("cannot write output file '" + output + "'");
      f << (format == "csv" ? res.csv : res.json);
    }
    res.exit_code = 0;
  } catch (const Error& e) {
    res.exit_code = error_kind_exit_code(e.kind());
    res.error_kind = error_kind_name(e.kind());
    res.error_message = e.what();
  } catch (const json::exception& e) {
    res.exit_code = 1;
    res.error_kind = error_kind_name(ErrorKind::Config);
    res.error_message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = 3;
    res.error_kind = "InternalError";
    res.error_message = e.what();
  }
  if (res.exit_code != 0) {
    json err{{"schema", 1}, {"error", res.error_kind}, {"message", res.error_message}, {"exit_code", res.exit_code}};
    res.json = err.dump(2) + "\n";
    res.csv.clear();
  }
  return res;
}

}  // namespace qcml
