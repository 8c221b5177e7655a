#pragma once

#include <numbers>

#include "rwi/core.hpp"
#include "rwi/signal.hpp"
#include "rwi/wave_sim.hpp"

namespace rwi::testing {

// Small 4 x 3 wavelength box (c_bar = 1, lambda = 1), four sensors on the top row.
struct SmallSetup {
  PulseSpec pulse = PulseSpec::gaussian(2.0 * std::numbers::pi);
  Grid2D grid{41, 31, 0.1};
  Rect omega_in{1.0, 3.0, 1.2, 2.6};
  BoundarySpec bc;
  int m = 4;
  double tau = 0.25;
  int n = 6;

  SensorArray array() const { return SensorArray::centered(grid, m, 0.5); }
  Medium background() const { return Medium::homogeneous(grid, 1.0, omega_in); }
  // Slow disc of radius 0.3 around (2, 1.9).
  Medium with_inclusion(double contrast = 0.9) const {
    Vec c = Vec::Ones(grid.size());
    for (int q = 0; q < grid.size(); ++q) {
      const Point2 p = grid.position(q);
      if ((p.x - 2.0) * (p.x - 2.0) + (p.z - 1.9) * (p.z - 1.9) <= 0.09) c[q] = contrast;
    }
    return Medium(grid, c, 1.0, omega_in);
  }
  TimeGrid time(double c_max = 1.0) const {
    return make_time_grid(tau, n, cfl_dt(grid.h(), c_max, 0.5), pulse.t_F());
  }
};

}  // namespace rwi::testing
