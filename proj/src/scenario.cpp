#include "rwi/scenario.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "rwi/io.hpp"

namespace rwi {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string shape_name(InclusionShape s) {
  switch (s) {
    case InclusionShape::ellipse: return "ellipse";
    case InclusionShape::rect: return "rect";
    case InclusionShape::bar: return "bar";
  }
  return "?";
}

InclusionShape parse_shape(const std::string& name) {
  if (name == "ellipse") return InclusionShape::ellipse;
  if (name == "rect") return InclusionShape::rect;
  if (name == "bar") return InclusionShape::bar;
  throw InvalidArgument(fmt::format("unknown inclusion shape '{}' (expected ellipse, rect or bar)", name));
}

EdgeCondition parse_edge(const std::string& name) {
  if (name == "soft") return EdgeCondition::soft;
  if (name == "hard") return EdgeCondition::hard;
  throw InvalidArgument(fmt::format("unknown boundary condition '{}' (expected soft or hard)", name));
}

std::string edge_name(EdgeCondition e) { return e == EdgeCondition::soft ? "soft" : "hard"; }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("scenario key '{}': {}", key, e.what()));
  }
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const json& s = root.at(key);
  if (!s.is_object()) throw InvalidArgument(fmt::format("scenario section '{}' must be an object", key));
  return s;
}

template <typename T>
T require(const json& j, const char* sec, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(fmt::format("scenario is missing '{}.{}'", sec, key));
  return get_or<T>(j, key, T{});
}

bool rect_inside(const Rect& inner, const Rect& outer) {
  return inner.x0 >= outer.x0 && inner.x1 <= outer.x1 && inner.z0 >= outer.z0 && inner.z1 <= outer.z1;
}

}  // namespace

bool Inclusion::contains(Point2 p) const {
  const double dx = p.x - center.x, dz = p.z - center.z;
  switch (shape) {
    case InclusionShape::ellipse: return (dx / a) * (dx / a) + (dz / b) * (dz / b) <= 1.0;
    case InclusionShape::rect: return std::abs(dx) <= a && std::abs(dz) <= b;
    case InclusionShape::bar: {
      const double th = angle_deg * kPi / 180.0;
      const double u = std::cos(th) * dx + std::sin(th) * dz;
      const double v = -std::sin(th) * dx + std::cos(th) * dz;
      return std::abs(u) <= a && std::abs(v) <= b;
    }
  }
  return false;
}

Rect Inclusion::bounds() const {
  double ex = a, ez = b;
  if (shape == InclusionShape::bar) {
    const double th = angle_deg * kPi / 180.0;
    ex = std::abs(a * std::cos(th)) + std::abs(b * std::sin(th));
    ez = std::abs(a * std::sin(th)) + std::abs(b * std::cos(th));
  }
  return {center.x - ex, center.x + ex, center.z - ez, center.z + ez};
}

double Scenario::lambda_c() const { return 2.0 * kPi * c_bar / pulse.omega_c; }

void Scenario::validate() const {
  pulse.validate();
  if (!(c_bar > 0.0)) throw InvalidArgument("background speed must be positive");
  if (!(width > 0.0) || !(depth > 0.0)) throw InvalidArgument("domain width and depth must be positive");
  if (!(h > 0.0)) throw InvalidArgument("grid step must be positive");
  if (m < 1) throw InvalidArgument("the array needs at least one sensor");
  if (m > 1 && !(sensor_spacing > 0.0)) throw InvalidArgument("sensor spacing must be positive");
  if ((m - 1) * sensor_spacing > width) throw InvalidArgument("the array is wider than the domain");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (n < 1) throw InvalidArgument("n must be at least 1");
  if (!(cfl_safety > 0.0) || !(cfl_safety < 1.0)) throw InvalidArgument("cfl_safety must lie in (0, 1)");
  if (!(noise_level >= 0.0)) throw InvalidArgument("noise level must be nonnegative");
  if (!(rom_eps >= 0.0)) throw InvalidArgument("rom eps must be nonnegative");
  if (eps_retries < 0) throw InvalidArgument("eps_retries must be nonnegative");
  if (!(omega_in.x1 > omega_in.x0) || !(omega_in.z1 > omega_in.z0))
    throw InvalidArgument("omega_in must have positive extent");
  if (!rect_inside(omega_in, {0.0, width, 0.0, depth})) throw InvalidArgument("omega_in must lie inside the domain");
  const double known = c_bar * pulse.t_F() / lambda_c();
  if (omega_in.z0 - array_depth < known * (1.0 - 1e-9))
    throw InvalidArgument(fmt::format("omega_in starts {:.4g} wavelengths below the array; it must stay {:.4g} away",
                                      omega_in.z0 - array_depth, known));
  const double reach = 0.5 * c_bar * (n - 1) * tau / lambda_c();
  if (omega_in.z0 - array_depth >= reach)
    throw InvalidArgument(fmt::format("omega_in starts {:.4g} wavelengths below the array but the first n snapshots "
                                      "only probe {:.4g}; raise n",
                                      omega_in.z0 - array_depth, reach));
  for (std::size_t i = 0; i < inclusions.size(); ++i) {
    const Inclusion& inc = inclusions[i];
    if (!(inc.a > 0.0) || !(inc.b > 0.0)) throw InvalidArgument(fmt::format("inclusion {} has a nonpositive size", i));
    if (!(inc.contrast > 0.0)) throw InvalidArgument(fmt::format("inclusion {} has a nonpositive contrast", i));
    if (!rect_inside(inc.bounds(), omega_in)) throw InvalidArgument(fmt::format("inclusion {} leaves omega_in", i));
  }
  inversion_config().validate();
  if (!(basis_params.range_spacing > 0.0) || !(basis_params.cross_spacing > 0.0) || !(basis_params.pixel_size > 0.0))
    throw InvalidArgument("basis spacings must be positive");
}

Grid2D Scenario::grid() const {
  const int nx = static_cast<int>(std::lround(width / h)) + 1;
  const int nz = static_cast<int>(std::lround(depth / h)) + 1;
  return Grid2D(nx, nz, h * lambda_c());
}

namespace {

Rect scaled(const Rect& r, double s) { return {r.x0 * s, r.x1 * s, r.z0 * s, r.z1 * s}; }

}  // namespace

Medium Scenario::background() const {
  return Medium::homogeneous(grid(), c_bar, scaled(omega_in, lambda_c()));
}

Medium Scenario::true_medium() const {
  const Grid2D g = grid();
  const double lam = lambda_c();
  Vec c = Vec::Constant(g.size(), c_bar);
  for (int q = 0; q < g.size(); ++q) {
    const Point2 p = g.position(q);
    const Point2 pl{p.x / lam, p.z / lam};
    // Later inclusions overwrite earlier ones.
    for (const Inclusion& inc : inclusions)
      if (inc.contains(pl)) c[q] = inc.contrast * c_bar;
  }
  return Medium(g, std::move(c), c_bar, scaled(omega_in, lam));
}

SensorArray Scenario::array() const {
  return SensorArray::centered(grid(), m, sensor_spacing * lambda_c(), array_depth * lambda_c());
}

TimeGrid Scenario::time_grid() const {
  double c_max = c_bar;
  for (const Inclusion& inc : inclusions) c_max = std::max(c_max, inc.contrast * c_bar);
  return make_time_grid(tau, n, cfl_dt(h * lambda_c(), c_max, cfl_safety), pulse.t_F());
}

SearchBasis Scenario::search_basis() const { return search_basis(basis); }

SearchBasis Scenario::search_basis(BasisKind kind) const {
  const double lam = lambda_c();
  BasisParams p = basis_params;
  p.range_spacing *= lam;
  p.cross_spacing *= lam;
  p.sigma_range *= lam;
  p.sigma_cross *= lam;
  p.pixel_size *= lam;
  return make_basis(kind, grid(), scaled(omega_in, lam), p);
}

InversionConfig Scenario::inversion_config() const {
  InversionConfig cfg;
  cfg.approach = approach;
  cfg.reg = regularizer;
  cfg.gamma = regularizer == Regularizer::tikhonov ? gamma_tikhonov : gamma_tv;
  cfg.max_iters = max_iters;
  cfg.stop_tol = stop_tol;
  cfg.tv_smoothing_eps = tv_smoothing_eps * c_bar / lambda_c();
  cfg.mass_eps = rom_eps;
  cfg.eps_retries = eps_retries;
  return cfg;
}

InversionProblem Scenario::problem() const {
  return InversionProblem{background(), array(), pulse, time_grid(), boundaries, search_basis(), true_medium()};
}

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("scenario is not valid JSON: {}", e.what()));
  }
  if (!root.is_object()) throw InvalidArgument("scenario must be a JSON object");
  Scenario s;
  s.name = get_or<std::string>(root, "name", s.name);

  const json& pulse = section(root, "pulse");
  s.pulse.omega_c = get_or<double>(pulse, "omega_c", s.pulse.omega_c);
  if (pulse.contains("bandwidth"))
    s.pulse.bandwidth = get_or<double>(pulse, "bandwidth", 0.0);
  else
    s.pulse.bandwidth = get_or<double>(pulse, "bandwidth_ratio", 0.25) * s.pulse.omega_c;

  const json& med = section(root, "medium");
  s.c_bar = get_or<double>(med, "c_bar", s.c_bar);
  s.width = require<double>(med, "medium", "width");
  s.depth = require<double>(med, "medium", "depth");
  if (!med.contains("omega_in")) throw InvalidArgument("scenario is missing 'medium.omega_in'");
  const json& om = med.at("omega_in");
  s.omega_in = {require<double>(om, "omega_in", "x0"), require<double>(om, "omega_in", "x1"),
                require<double>(om, "omega_in", "z0"), require<double>(om, "omega_in", "z1")};
  if (med.contains("inclusions")) {
    for (const json& ij : med.at("inclusions")) {
      Inclusion inc;
      inc.shape = parse_shape(get_or<std::string>(ij, "shape", "ellipse"));
      const auto center = require<std::vector<double>>(ij, "inclusion", "center");
      if (center.size() != 2) throw InvalidArgument("inclusion center must be [x, z]");
      inc.center = {center[0], center[1]};
      if (ij.contains("radius")) {
        inc.a = inc.b = get_or<double>(ij, "radius", 0.0);
      } else {
        inc.a = require<double>(ij, "inclusion", "a");
        inc.b = require<double>(ij, "inclusion", "b");
      }
      inc.angle_deg = get_or<double>(ij, "angle_deg", 0.0);
      inc.contrast = require<double>(ij, "inclusion", "contrast");
      s.inclusions.push_back(inc);
    }
  }

  const json& grid = section(root, "grid");
  s.h = get_or<double>(grid, "h", 0.0);
  if (s.h == 0.0 && s.pulse.omega_c > 0.0 && s.c_bar > 0.0)
    s.h = grid_spacing(s.pulse.omega_c, s.pulse.bandwidth, s.c_bar) / s.lambda_c();

  const json& arr = section(root, "array");
  s.m = require<int>(arr, "array", "m");
  s.sensor_spacing = get_or<double>(arr, "spacing", 0.0);
  s.array_depth = get_or<double>(arr, "depth", 0.0);

  const json& time = section(root, "time");
  s.tau = get_or<double>(time, "tau", 0.0);
  if (s.tau == 0.0 && s.pulse.omega_c > 0.0) s.tau = kPi / (3.0 * s.pulse.omega_c);
  s.n = require<int>(time, "time", "n");
  s.cfl_safety = get_or<double>(time, "cfl_safety", s.cfl_safety);

  const json& bc = section(root, "boundaries");
  s.boundaries.top = parse_edge(get_or<std::string>(bc, "top", "hard"));
  s.boundaries.bottom = parse_edge(get_or<std::string>(bc, "bottom", "soft"));
  s.boundaries.left = parse_edge(get_or<std::string>(bc, "left", "soft"));
  s.boundaries.right = parse_edge(get_or<std::string>(bc, "right", "soft"));

  const json& noise = section(root, "noise");
  s.noise_level = get_or<double>(noise, "level", 0.0);
  s.noise_seed = get_or<std::uint64_t>(noise, "seed", 1);

  const json& rom = section(root, "rom");
  s.rom_eps = get_or<double>(rom, "eps", 0.0);
  s.eps_retries = get_or<int>(rom, "eps_retries", 4);

  const json& inv = section(root, "inversion");
  s.approach = parse_approach(get_or<std::string>(inv, "approach", "rom2"));
  s.regularizer = parse_regularizer(get_or<std::string>(inv, "regularizer", "tikhonov"));
  s.basis = parse_basis_kind(get_or<std::string>(inv, "basis", "hat"));
  s.basis_params.range_spacing = get_or<double>(inv, "hat_range", 3.0 / 16.0);
  s.basis_params.cross_spacing = get_or<double>(inv, "hat_cross", 0.25);
  s.basis_params.sigma_range = get_or<double>(inv, "sigma_range", 0.0);
  s.basis_params.sigma_cross = get_or<double>(inv, "sigma_cross", 0.0);
  s.basis_params.pixel_size = get_or<double>(inv, "pixel", 0.125);
  s.basis_params.gaussian_cutoff = get_or<double>(inv, "gaussian_cutoff", 4.0);
  s.gamma_tikhonov = get_or<double>(inv, "gamma_tikhonov", default_gamma(Regularizer::tikhonov));
  s.gamma_tv = get_or<double>(inv, "gamma_tv", default_gamma(Regularizer::tv));
  s.max_iters = get_or<int>(inv, "max_iters", 10);
  s.stop_tol = get_or<double>(inv, "stop_tol", 1e-3);
  s.tv_smoothing_eps = get_or<double>(inv, "tv_smoothing_eps", 1e-3);

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(io::read_all(path)); }

std::string scenario_to_json(const Scenario& s) {
  json inclusions = json::array();
  for (const Inclusion& inc : s.inclusions) {
    inclusions.push_back({{"shape", shape_name(inc.shape)},
                          {"center", {inc.center.x, inc.center.z}},
                          {"a", inc.a},
                          {"b", inc.b},
                          {"angle_deg", inc.angle_deg},
                          {"contrast", inc.contrast}});
  }
  json root = {
      {"name", s.name},
      {"pulse", {{"omega_c", s.pulse.omega_c}, {"bandwidth", s.pulse.bandwidth}}},
      {"medium",
       {{"c_bar", s.c_bar},
        {"width", s.width},
        {"depth", s.depth},
        {"omega_in", {{"x0", s.omega_in.x0}, {"x1", s.omega_in.x1}, {"z0", s.omega_in.z0}, {"z1", s.omega_in.z1}}},
        {"inclusions", inclusions}}},
      {"grid", {{"h", s.h}}},
      {"array", {{"m", s.m}, {"spacing", s.sensor_spacing}, {"depth", s.array_depth}}},
      {"time", {{"tau", s.tau}, {"n", s.n}, {"cfl_safety", s.cfl_safety}}},
      {"boundaries",
       {{"top", edge_name(s.boundaries.top)},
        {"bottom", edge_name(s.boundaries.bottom)},
        {"left", edge_name(s.boundaries.left)},
        {"right", edge_name(s.boundaries.right)}}},
      {"noise", {{"level", s.noise_level}, {"seed", s.noise_seed}}},
      {"rom", {{"eps", s.rom_eps}, {"eps_retries", s.eps_retries}}},
      {"inversion",
       {{"approach", to_string(s.approach)},
        {"regularizer", to_string(s.regularizer)},
        {"basis", to_string(s.basis)},
        {"hat_range", s.basis_params.range_spacing},
        {"hat_cross", s.basis_params.cross_spacing},
        {"sigma_range", s.basis_params.sigma_range},
        {"sigma_cross", s.basis_params.sigma_cross},
        {"pixel", s.basis_params.pixel_size},
        {"gaussian_cutoff", s.basis_params.gaussian_cutoff},
        {"gamma_tikhonov", s.gamma_tikhonov},
        {"gamma_tv", s.gamma_tv},
        {"max_iters", s.max_iters},
        {"stop_tol", s.stop_tol},
        {"tv_smoothing_eps", s.tv_smoothing_eps}}},
  };
  return root.dump(2) + "\n";
}

}  // namespace rwi
