#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rwi/basis.hpp"
#include "rwi/core.hpp"
#include "rwi/signal.hpp"
#include "rwi/wave_sim.hpp"

namespace rwi {

/// (c^2 - c_ref^2) / (c c_ref), pointwise.
Vec rho_of_speeds(const Vec& c, const Vec& c_ref);
/// Inverse of rho_of_speeds: c_ref (rho + sqrt(4 + rho^2)) / 2.
Vec speed_of_rho(const Vec& rho, const Vec& c_ref);

/// Discrete form of int_0^{j tau} dt' int weight(x) u^(s)(t', x) du^(r)(j tau - t', x) dx for j = 0 .. n-1:
/// trapezoid rule on the tau lattice, h^2 node quadrature in space. Entry (r, s) of each m x m matrix.
std::vector<Mat> scattering_convolution(const Vec& weight, const SnapshotSet& u, const Mat& du);

/// Lambda_q(j tau) for every basis function, stacked as rows (j, r, s) lexicographic, j outer.
struct LambdaSet {
  int n = 0;
  int m = 0;
  Mat data;  // (n m^2) x N_rho

  int row(int j, int r, int s) const { return (j * m + r) * m + s; }
  Mat block(int q, int j) const;
};

LambdaSet lambda_matrices(const SearchBasis& basis, const SnapshotSet& u_est, const SnapshotSet& du_ref);

/// Largest mismatch, relative to the peak of |D - D_ref|, between D - D_ref and the scattering
/// integral of rho with the given internal wave, over entries at least 1% of that peak (j < n).
double forward_check(const Vec& rho, const SnapshotSet& u_true, const SnapshotSet& du_ref, const DataCube& cube,
                     const DataCube& cube_ref);

struct LeastSquares {
  Mat Gamma;  // (n m^2) x N_rho
  Vec b;      // (n m^2)
};

/// Rows (j, r, s), j = 0 .. n-1, scaled by sqrt(tau).
LeastSquares assemble_lsq(const LambdaSet& lambda, const DataCube& cube, const DataCube& cube_ref);

/// [sum_j ||D_j - D_j(c_k)||_F^2 / sum_j ||D_j||_F^2]^{1/2} over all stored j.
double relative_misfit(const DataCube& cube, const DataCube& cube_k);

enum class Approach { rom1, rom2, fwi, ideal };
enum class Regularizer { tikhonov, tv };

Approach parse_approach(const std::string& name);
Regularizer parse_regularizer(const std::string& name);
std::string to_string(Approach a);
std::string to_string(Regularizer r);
/// 0.03 for Tikhonov, 0.01 for TV.
double default_gamma(Regularizer r);

struct InversionConfig {
  Approach approach = Approach::rom2;
  Regularizer reg = Regularizer::tikhonov;
  double gamma = 0.03;
  int max_iters = 10;
  double stop_tol = 1e-3;
  double tv_smoothing_eps = 1e-3;
  double mass_eps = 0.0;  // starting mass-matrix regularization
  int eps_retries = 4;

  void validate() const;
};

/// Everything about the experiment except the measured data.
struct InversionProblem {
  Medium initial;  // c_0 together with grid, background and omega_in
  SensorArray array;
  PulseSpec pulse;
  TimeGrid time;
  BoundarySpec boundaries;
  SearchBasis basis;
  std::optional<Medium> truth;  // only for the ideal run
};

struct InversionState {
  Vec eta;
  Medium c_k;
  int k = 0;
  std::vector<double> misfit_history;  // entry 0 is the misfit of c_0, then one per iteration
  std::vector<Vec> eta_history;
  std::vector<Vec> speed_history;      // c_1, c_2, ...
  double mass_eps = 0.0;               // regularization finally used for the data mass matrix
};

using IterationHook = std::function<void(const InversionState&)>;

InversionState invert(const InversionConfig& config, const DataCube& cube, const InversionProblem& problem,
                      const IterationHook& hook = {});

}  // namespace rwi
