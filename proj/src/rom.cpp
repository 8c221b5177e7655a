#include "rwi/rom.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>

namespace rwi {

namespace {

int resolve_n(const DataCube& cube, int n, int needed_extra, const char* what) {
  if (n < 0) n = cube.n();
  if (n < 1) throw InvalidArgument(fmt::format("{} needs at least one block", what));
  const int needed = 2 * n - 1 + needed_extra;
  if (cube.count() < needed)
    throw InvalidArgument(fmt::format("{} with n = {} needs D_0 .. D_{}, cube has {}", what, n, needed - 1, cube.count()));
  return n;
}

}  // namespace

BlockMatrix assemble_mass(const DataCube& cube, int n) {
  n = resolve_n(cube, n, 0, "mass assembly");
  const int m = cube.m;
  Mat data(n * m, n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) data.block(i * m, j * m, m, m) = 0.5 * (cube[i + j] + cube[std::abs(i - j)]);
  return BlockMatrix(n, m, std::move(data));
}

BlockMatrix assemble_stiffness(const DataCube& cube, int n) {
  n = resolve_n(cube, n, 1, "stiffness assembly");
  const int m = cube.m;
  Mat data(n * m, n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      data.block(i * m, j * m, m, m) = 0.25 * (cube[i + j + 1] + cube[std::abs(i - j - 1)] + cube[std::abs(i + j - 1)] +
                                               cube[std::abs(i - j + 1)]);
  return BlockMatrix(n, m, std::move(data));
}

BlockMatrix symmetrize_regularize(const BlockMatrix& M, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("regularization eps must be nonnegative");
  const int n = M.nblocks(), m = M.block_size();
  Mat data = 0.5 * (M.data() + M.data().transpose());
  const Mat shift = eps * data.topLeftCorner(m, m);
  for (int i = 0; i < n; ++i) data.block(i * m, i * m, m, m) += shift;
  return BlockMatrix(n, m, std::move(data), BlockStructure::symmetric);
}

BlockMatrix block_cholesky(const BlockMatrix& M) {
  const int n = M.nblocks(), m = M.block_size();
  const Mat& A = M.data();
  Mat R = Mat::Zero(n * m, n * m);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      Mat rhs = A.block(i * m, j * m, m, m);
      for (int q = 0; q < i; ++q)
        rhs.noalias() -= R.block(q * m, i * m, m, m).transpose() * R.block(q * m, j * m, m, m);
      R.block(i * m, j * m, m, m) =
          R.block(i * m, i * m, m, m).transpose().triangularView<Eigen::Lower>().solve(rhs);
    }
    Mat C = A.block(j * m, j * m, m, m);
    for (int q = 0; q < j; ++q) C.noalias() -= R.block(q * m, j * m, m, m).transpose() * R.block(q * m, j * m, m, m);
    C = 0.5 * (C + C.transpose());
    Eigen::LLT<Mat> llt(C);
    if (llt.info() != Eigen::Success)
      throw NotPositiveDefinite(j, fmt::format("pivot block {} of the mass matrix is not positive definite", j));
    R.block(j * m, j * m, m, m) = llt.matrixU();
  }
  return BlockMatrix(n, m, std::move(R), BlockStructure::block_upper_triangular);
}

BlockMatrix rom_propagator(const BlockMatrix& R, const BlockMatrix& S) {
  if (R.dim() != S.dim() || R.block_size() != S.block_size()) throw InvalidArgument("R and S shapes differ");
  const Vec diag = R.data().diagonal();
  if (diag.cwiseAbs().minCoeff() == 0.0) throw SingularMatrix("Cholesky factor has a zero pivot");
  auto Rt = R.data().transpose().triangularView<Eigen::Lower>();
  const Mat X = Rt.solve(S.data());                 // R^{-T} S
  const Mat P = Rt.solve(X.transpose()).transpose();  // (R^{-T} X^T)^T = X R^{-1}
  Mat sym = 0.5 * (P + P.transpose());
  if (!sym.allFinite()) throw SingularMatrix("propagator is not finite");
  return BlockMatrix(R.nblocks(), R.block_size(), std::move(sym), BlockStructure::symmetric);
}

std::vector<Mat> cosine_recursion(const Mat& P, const Mat& u0, int J) {
  if (J < 0) throw InvalidArgument("step count must be nonnegative");
  if (P.rows() != P.cols() || P.cols() != u0.rows()) throw InvalidArgument("propagator and state shapes differ");
  std::vector<Mat> u;
  u.reserve(J + 1);
  u.push_back(u0);
  if (J >= 1) u.push_back(P * u0);
  for (int j = 1; j < J; ++j) u.push_back(2.0 * P * u[j] - u[j - 1]);
  return u;
}

std::vector<Mat> rom_step(const BlockMatrix& P_rom, const BlockMatrix& R, int J) {
  const int m = R.block_size();
  return cosine_recursion(P_rom.data(), R.data().leftCols(m), J);
}

std::vector<Mat> galerkin_extend(const BlockMatrix& M, const BlockMatrix& S, const Mat& g_prev, const Mat& g_last,
                                 int J) {
  const int n = M.nblocks();
  if (g_prev.rows() != M.dim() || g_last.rows() != M.dim() || g_prev.cols() != g_last.cols())
    throw InvalidArgument("Galerkin seeds have the wrong shape");
  Eigen::LLT<Mat> llt(M.data());
  if (llt.info() != Eigen::Success) throw SingularMatrix("mass matrix is not positive definite");
  std::vector<Mat> out;
  Mat a = g_prev, b = g_last;
  for (int j = n - 1; j < J; ++j) {
    Mat next = 2.0 * llt.solve(S.data() * b) - a;
    out.push_back(next);
    a = std::move(b);
    b = std::move(next);
  }
  return out;
}

MassFactor factor_mass(const BlockMatrix& M, double eps, int max_retries, double eps_floor) {
  if (!(eps >= 0.0)) throw InvalidArgument("regularization eps must be nonnegative");
  for (int attempt = 0;; ++attempt) {
    BlockMatrix Mr = symmetrize_regularize(M, eps);
    try {
      BlockMatrix R = block_cholesky(Mr);
      return {std::move(Mr), std::move(R), eps, attempt};
    } catch (const NotPositiveDefinite&) {
      if (attempt >= max_retries) throw;
      eps = eps > 0.0 ? 10.0 * eps : eps_floor;
    }
  }
}

RomModel build_rom(const DataCube& cube, double eps, int max_retries) {
  const int n = cube.n();
  MassFactor mf = factor_mass(assemble_mass(cube, n), eps, max_retries);
  BlockMatrix S = assemble_stiffness(cube, n);
  BlockMatrix P = rom_propagator(mf.R, S);
  return {std::move(mf.M), std::move(S), std::move(mf.R), std::move(P), mf.eps};
}

}  // namespace rwi
