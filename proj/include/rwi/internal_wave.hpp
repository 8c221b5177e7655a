#pragma once

#include <algorithm>
#include <vector>

#include "rwi/core.hpp"
#include "rwi/rom.hpp"
#include "rwi/wave_sim.hpp"

namespace rwi {

/// h^2-weighted Gram matrix of a snapshot set, as a block matrix (n blocks of size m).
BlockMatrix snapshot_gram(const SnapshotSet& U);

/// Orthonormal basis V = U_ref R_ref^{-1} of the reference snapshots.
struct ReferenceBasis {
  Grid2D grid{2, 2, 1.0};
  int n = 0;
  int m = 0;
  double tau = 0.0;
  Mat V;              // grid nodes x (n m), column j * m + s
  BlockMatrix M_ref;  // regularized Gram matrix
  BlockMatrix R_ref;
  double eps = 0.0;   // regularization that was finally applied
};

/// Builds V from the reference snapshots. The Gram matrix goes through the same regularization and
/// eps escalation as the data mass matrix.
ReferenceBasis build_reference_basis(const SnapshotSet& U_ref, double eps = 0.0, int max_retries = 4);

/// u~_j = V R e_j with R from the measured data.
SnapshotSet estimate_internal(const ReferenceBasis& basis, const BlockMatrix& R);

/// V R_ref e_j; reproduces the reference snapshots.
SnapshotSet reference_internal(const ReferenceBasis& basis);

struct DatafitReport {
  std::vector<double> first;   // ||D_j - int u_0^T u_j|| / ||D_j||
  std::vector<double> second;  // ||D_{j+n-1} + D_{n-1-j} - 2 int u_{n-1}^T u_j|| / ||D_{j+n-1} + D_{n-1-j}||
  double max_first = 0.0;
  double max_second = 0.0;
  double max() const { return std::max(max_first, max_second); }
};

/// Residuals of the two data-fit relations for the snapshots `est` against `cube`.
DatafitReport check_datafit(const SnapshotSet& est, const DataCube& cube);

/// Linear interpolation between the bracketing snapshots; returns grid nodes x m.
Mat interpolate_in_time(const SnapshotSet& set, double t);

/// Relative Frobenius distance between two bases on the same grid (diagnostic only).
double basis_distance(const ReferenceBasis& a, const ReferenceBasis& b);

}  // namespace rwi
