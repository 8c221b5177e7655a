#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rwi/basis.hpp"
#include "rwi/core.hpp"
#include "rwi/inversion.hpp"
#include "rwi/signal.hpp"
#include "rwi/wave_sim.hpp"

namespace rwi {

enum class InclusionShape { ellipse, rect, bar };

/// One region of constant speed contrast * c_bar. Lengths in central wavelengths.
/// ellipse: centre and semi-axes (a along x, b along z)
/// rect:    centre and half sizes (a along x, b along z)
/// bar:     centre, half length a, half thickness b, rotated by angle_deg from the x axis
struct Inclusion {
  InclusionShape shape = InclusionShape::ellipse;
  Point2 center;
  double a = 0.0;
  double b = 0.0;
  double angle_deg = 0.0;
  double contrast = 1.0;

  bool contains(Point2 p) const;
  /// Axis-aligned box enclosing the region.
  Rect bounds() const;
};

/// Everything needed to synthesize data and run inversions. Lengths (domain, grid step, sensor
/// layout, inclusions, basis sizes) are in central wavelengths lambda_c = 2 pi c_bar / omega_c;
/// the accessors below return objects in physical units. tau is a physical time.
struct Scenario {
  std::string name = "scenario";
  PulseSpec pulse = PulseSpec::gaussian(2.0 * 3.14159265358979323846);
  double c_bar = 1.0;
  double width = 0.0;
  double depth = 0.0;
  Rect omega_in;
  std::vector<Inclusion> inclusions;
  double h = 0.0;
  int m = 0;
  double sensor_spacing = 0.0;
  double array_depth = 0.0;
  double tau = 0.0;
  int n = 0;
  double cfl_safety = 0.5;
  BoundarySpec boundaries;
  double noise_level = 0.0;
  std::uint64_t noise_seed = 1;
  double rom_eps = 0.0;
  int eps_retries = 4;
  BasisKind basis = BasisKind::hat;
  BasisParams basis_params;
  Approach approach = Approach::rom2;
  Regularizer regularizer = Regularizer::tikhonov;
  double gamma_tikhonov = 0.03;
  double gamma_tv = 0.01;
  int max_iters = 10;
  double stop_tol = 1e-3;
  double tv_smoothing_eps = 1e-3;

  double lambda_c() const;
  void validate() const;

  Grid2D grid() const;
  Medium true_medium() const;
  Medium background() const;
  SensorArray array() const;
  /// dt is sized for the larger of c_bar and the fastest inclusion.
  TimeGrid time_grid() const;
  SearchBasis search_basis() const;
  SearchBasis search_basis(BasisKind kind) const;
  InversionConfig inversion_config() const;
  /// Problem description with c_0 = background and the true medium attached.
  InversionProblem problem() const;
};

/// Parses the JSON text of a scenario; missing optional keys take their defaults.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);
/// Full JSON echo (every field, derived values filled in); parse_scenario reads it back unchanged.
std::string scenario_to_json(const Scenario& s);

}  // namespace rwi
