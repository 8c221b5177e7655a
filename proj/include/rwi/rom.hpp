#pragma once

#include <vector>

#include "rwi/core.hpp"
#include "rwi/wave_sim.hpp"

namespace rwi {

/// Mass matrix, block (i, j) = (D_{i+j} + D_{|i-j|}) / 2. n defaults to cube.n().
BlockMatrix assemble_mass(const DataCube& cube, int n = -1);

/// Stiffness matrix, block (i, j) = (D_{i+j+1} + D_{|i-j-1|} + D_{|i+j-1|} + D_{|i-j+1|}) / 4.
BlockMatrix assemble_stiffness(const DataCube& cube, int n = -1);

/// (M + M^T) / 2, then eps * M_{0,0} added to every diagonal block.
BlockMatrix symmetrize_regularize(const BlockMatrix& M, double eps);

/// Block-upper-triangular R with R^T R = M and positive diagonal, built one block column at a time.
/// Throws NotPositiveDefinite carrying the failing block column.
BlockMatrix block_cholesky(const BlockMatrix& M);

/// R^{-T} S R^{-1} by triangular solves, symmetrized.
BlockMatrix rom_propagator(const BlockMatrix& R, const BlockMatrix& S);

/// u_{j+1} = 2 P u_j - u_{|j-1|} from u_0, returning u_0 .. u_J.
std::vector<Mat> cosine_recursion(const Mat& P, const Mat& u0, int J);

/// ROM snapshots u_j^ROM, j = 0 .. J, started from R e_0.
std::vector<Mat> rom_step(const BlockMatrix& P_rom, const BlockMatrix& R, int J);

/// Galerkin coefficients g_n .. g_J from M (g_{j+1} + g_{j-1}) = 2 S g_j.
std::vector<Mat> galerkin_extend(const BlockMatrix& M, const BlockMatrix& S, const Mat& g_prev, const Mat& g_last,
                                 int J);

/// Regularized mass matrix and its factor; `eps` is what finally worked.
struct MassFactor {
  BlockMatrix M;
  BlockMatrix R;
  double eps = 0.0;
  int retries = 0;
};

/// Factors symmetrize_regularize(M, eps). On failure eps grows tenfold (from eps_floor when eps is 0),
/// at most `max_retries` times; the last NotPositiveDefinite is rethrown.
MassFactor factor_mass(const BlockMatrix& M, double eps, int max_retries = 4, double eps_floor = 1e-6);

struct RomModel {
  BlockMatrix M;  // regularized
  BlockMatrix S;
  BlockMatrix R;
  BlockMatrix P;
  double eps = 0.0;
};

/// Mass, stiffness, factor and propagator from a data cube.
RomModel build_rom(const DataCube& cube, double eps, int max_retries = 4);

}  // namespace rwi
