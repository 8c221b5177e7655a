#pragma once

#include <Eigen/Sparse>

#include <string>

#include "rwi/core.hpp"

namespace rwi {

enum class BasisKind { hat, gaussian, pixel };

BasisKind parse_basis_kind(const std::string& name);
std::string to_string(BasisKind kind);

struct BasisParams {
  double range_spacing = 0.0;  // hat / gaussian mesh step along z
  double cross_spacing = 0.0;  // hat / gaussian mesh step along x
  double sigma_range = 0.0;    // gaussian widths; 0 selects the width matching the hat's half maximum
  double sigma_cross = 0.0;
  double pixel_size = 0.0;     // pixel cell edge
  double gaussian_cutoff = 4.0;  // gaussians are zeroed beyond this many widths
};

/// Search-space functions beta_q sampled on the grid nodes: column q of `values` is beta_q.
struct SearchBasis {
  BasisKind kind = BasisKind::hat;
  Eigen::SparseMatrix<double> values;  // grid nodes x N_rho
  std::vector<Point2> centers;         // mesh node or cell centre of each function

  int size() const { return static_cast<int>(values.cols()); }
  /// sum_q eta_q beta_q on the grid.
  Vec field(const Vec& eta) const { return values * eta; }
};

/// Bilinear hats on the interior nodes of a uniform mesh over omega_in.
SearchBasis hat_basis(const Grid2D& grid, const Rect& omega_in, double range_spacing, double cross_spacing);

/// Gaussians on the same mesh, restricted to omega_in.
SearchBasis gaussian_basis(const Grid2D& grid, const Rect& omega_in, double range_spacing, double cross_spacing,
                           double sigma_range, double sigma_cross, double cutoff = 4.0);

/// Indicators of square cells tiling omega_in; each grid node belongs to exactly one cell.
SearchBasis pixel_basis(const Grid2D& grid, const Rect& omega_in, double cell);

SearchBasis make_basis(BasisKind kind, const Grid2D& grid, const Rect& omega_in, const BasisParams& params);

/// Standard deviation giving a Gaussian the same full width at half maximum as a hat of this spacing.
double matching_sigma(double spacing);

}  // namespace rwi
