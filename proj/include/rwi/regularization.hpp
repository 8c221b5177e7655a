#pragma once

#include <Eigen/Sparse>

#include "rwi/basis.hpp"
#include "rwi/core.hpp"

namespace rwi {

/// Largest singular value.
double spectral_norm(const Mat& A);

/// Minimizer of ||Gamma d - b||^2 + alpha ||d||^2 with alpha = (gamma ||Gamma||_2)^2.
Vec tikhonov_step(const Mat& Gamma, const Vec& b, double gamma);

/// Generalized SVD of the pencil (A, B), both with N columns and [A; B] of full column rank:
/// A = U diag(c) X, B = V diag(s) X with c^2 + s^2 = 1, ordered so that c / s increases.
struct Gsvd {
  Vec c;
  Vec s;
  /// c / s, infinite where s vanishes.
  Vec values() const;
};
Gsvd gsvd(const Mat& A, const Mat& B);

/// One-sided differences (divided by h) on every grid edge with at least one end in omega_in.
Eigen::SparseMatrix<double> gradient_operator(const Grid2D& grid, const Rect& omega_in);

struct TvSetup {
  Mat Psi;
  Vec xi;
  double sigma = 0.0;  // largest generalized singular value of (Gamma, Psi)
  double alpha = 0.0;
};

/// Linearized, reweighted TV term alpha ||Psi d + xi||^2 around the coefficients eta_k.
/// c_ref is the speed the search field is measured against (speed = c_ref * map(rho)).
TvSetup tv_setup(const Mat& Gamma, const Vec& eta_k, const SearchBasis& basis, const Vec& c_ref,
                 const Grid2D& grid, const Rect& omega_in, double gamma, double smoothing_eps);

/// Minimizer of ||Gamma d - b||^2 + alpha ||Psi d + xi||^2 with the TV setup above.
Vec tv_step(const Mat& Gamma, const Vec& b, const Vec& eta_k, const SearchBasis& basis, const Vec& c_ref,
            const Grid2D& grid, const Rect& omega_in, double gamma, double smoothing_eps);

}  // namespace rwi
