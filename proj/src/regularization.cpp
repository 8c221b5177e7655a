#include "rwi/regularization.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rwi/inversion.hpp"

namespace rwi {

double spectral_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  const Mat G = A.cols() <= A.rows() ? Mat(A.transpose() * A) : Mat(A * A.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

namespace {

Vec solve_spd(const Mat& K, const Vec& rhs) {
  Eigen::LLT<Mat> llt(K);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  Eigen::LDLT<Mat> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw SingularMatrix("regularized normal equations are singular");
  return ldlt.solve(rhs);
}

}  // namespace

Vec tikhonov_step(const Mat& Gamma, const Vec& b, double gamma) {
  if (Gamma.rows() != b.size()) throw InvalidArgument("Gamma and b have different row counts");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
  const double sigma = spectral_norm(Gamma);
  if (!(sigma > 0.0)) throw InvalidArgument("Gamma is zero");
  const double alpha = (gamma * sigma) * (gamma * sigma);
  Mat K = Gamma.transpose() * Gamma;
  K.diagonal().array() += alpha;
  return solve_spd(K, Gamma.transpose() * b);
}

Vec Gsvd::values() const {
  Vec v(c.size());
  for (Eigen::Index j = 0; j < c.size(); ++j)
    v[j] = s[j] > 0.0 ? c[j] / s[j] : std::numeric_limits<double>::infinity();
  return v;
}

Gsvd gsvd(const Mat& A, const Mat& B) {
  const Eigen::Index N = A.cols();
  if (B.cols() != N) throw InvalidArgument("pencil matrices need the same column count");
  Mat K(A.rows() + B.rows(), N);
  K << A, B;
  Eigen::HouseholderQR<Mat> qr(K);
  const Mat R = qr.matrixQR().topRows(N).triangularView<Eigen::Upper>();
  const double scale = R.diagonal().cwiseAbs().maxCoeff();
  if (!(R.diagonal().cwiseAbs().minCoeff() > 1e-13 * scale))
    throw InvalidArgument("stacked pencil is rank deficient");
  const Mat Q = qr.householderQ() * Mat::Identity(K.rows(), N);
  const Mat Q1 = Q.topRows(A.rows());
  const Mat Q2 = Q.bottomRows(B.rows());

  Eigen::BDCSVD<Mat> svd(Q2, Eigen::ComputeFullV);
  const Mat& W = svd.matrixV();
  Gsvd out;
  out.c.resize(N);
  out.s.resize(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    out.s[j] = j < svd.singularValues().size() ? svd.singularValues()[j] : 0.0;
    out.c[j] = (Q1 * W.col(j)).norm();
  }
  // Singular values of Q2 come in decreasing order, so c / s already increases.
  return out;
}

Eigen::SparseMatrix<double> gradient_operator(const Grid2D& grid, const Rect& omega_in) {
  std::vector<Eigen::Triplet<double>> t;
  const double inv_h = 1.0 / grid.h();
  int row = 0;
  auto inside = [&](int i, int k) { return omega_in.contains(grid.position(i, k)); };
  for (int k = 0; k < grid.nz(); ++k) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (i + 1 < grid.nx() && (inside(i, k) || inside(i + 1, k))) {
        t.emplace_back(row, grid.index(i + 1, k), inv_h);
        t.emplace_back(row, grid.index(i, k), -inv_h);
        ++row;
      }
      if (k + 1 < grid.nz() && (inside(i, k) || inside(i, k + 1))) {
        t.emplace_back(row, grid.index(i, k + 1), inv_h);
        t.emplace_back(row, grid.index(i, k), -inv_h);
        ++row;
      }
    }
  }
  Eigen::SparseMatrix<double> G(row, grid.size());
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

TvSetup tv_setup(const Mat& Gamma, const Vec& eta_k, const SearchBasis& basis, const Vec& c_ref,
                 const Grid2D& grid, const Rect& omega_in, double gamma, double smoothing_eps) {
  if (eta_k.size() != basis.size()) throw InvalidArgument("coefficient vector does not match the basis");
  if (c_ref.size() != grid.size()) throw InvalidArgument("reference speed does not match the grid");
  if (!(smoothing_eps > 0.0)) throw InvalidArgument("TV smoothing must be positive");
  const Vec rho = basis.field(eta_k);
  const Vec c = speed_of_rho(rho, c_ref);
  Vec slope(grid.size());
  for (int q = 0; q < grid.size(); ++q)
    slope[q] = 0.5 * c_ref[q] * (1.0 + rho[q] / std::sqrt(4.0 + rho[q] * rho[q]));
  const Eigen::SparseMatrix<double> G = gradient_operator(grid, omega_in);
  const Vec g = G * c;
  const Vec w = (g.array().square() + smoothing_eps * smoothing_eps).pow(-0.25).matrix();
  const Eigen::SparseMatrix<double> J = slope.asDiagonal() * basis.values;
  TvSetup out;
  out.Psi = Mat(w.asDiagonal() * (G * J));
  out.xi = w.cwiseProduct(g);
  Gsvd d;
  try {
    d = gsvd(Gamma, out.Psi);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("TV regularization setup failed: the pencil (Gamma, Psi) is rank deficient");
  }
  if (!(d.s.minCoeff() > 1e-12)) throw InvalidArgument("TV regularization setup failed: Psi is rank deficient");
  out.sigma = d.values().maxCoeff();
  out.alpha = (gamma * out.sigma) * (gamma * out.sigma);
  return out;
}

Vec tv_step(const Mat& Gamma, const Vec& b, const Vec& eta_k, const SearchBasis& basis, const Vec& c_ref,
            const Grid2D& grid, const Rect& omega_in, double gamma, double smoothing_eps) {
  if (Gamma.rows() != b.size()) throw InvalidArgument("Gamma and b have different row counts");
  const TvSetup tv = tv_setup(Gamma, eta_k, basis, c_ref, grid, omega_in, gamma, smoothing_eps);
  const Mat K = Gamma.transpose() * Gamma + tv.alpha * tv.Psi.transpose() * tv.Psi;
  return solve_spd(K, Gamma.transpose() * b - tv.alpha * tv.Psi.transpose() * tv.xi);
}

}  // namespace rwi
