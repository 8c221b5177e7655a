#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rwi/rom.hpp"

using namespace rwi;

namespace {

// Data generated by an explicit propagator: u_j = T_j(A) b, D_j = b^T u_j. The Gram matrices of
// u_0 .. u_{n-1} are the exact mass and stiffness matrices.
struct MatrixModel {
  Mat A, b;
  std::vector<Mat> u;
  DataCube cube;
};

MatrixModel matrix_model(int N, int m, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Mat Q = Mat::NullaryExpr(N, N, [&]() { return U(rng); });
  Eigen::HouseholderQR<Mat> qr(Q);
  const Mat orth = qr.householderQ();
  Vec lam(N);
  for (int i = 0; i < N; ++i) lam[i] = std::cos(0.1 + 2.9 * i / N);
  MatrixModel mm;
  mm.A = orth * lam.asDiagonal() * orth.transpose();
  mm.b = Mat::NullaryExpr(N, m, [&]() { return U(rng); });
  mm.u = cosine_recursion(mm.A, mm.b, 2 * n);
  mm.cube.m = m;
  mm.cube.tau = 1.0;
  for (int j = 0; j < 2 * n; ++j) mm.cube.D.push_back(mm.b.transpose() * mm.u[j]);
  return mm;
}

Mat stack(const std::vector<Mat>& u, int n) {
  Mat out(u[0].rows(), n * u[0].cols());
  for (int j = 0; j < n; ++j) out.middleCols(j * u[0].cols(), u[0].cols()) = u[j];
  return out;
}

}  // namespace

TEST(Assembly, HandWorkedScalarCase) {
  DataCube cube;
  cube.m = 1;
  cube.tau = 1.0;
  for (double d : {1.0, 2.0, 3.0, 4.0}) cube.D.push_back(Mat::Constant(1, 1, d));
  const BlockMatrix M = assemble_mass(cube);
  const BlockMatrix S = assemble_stiffness(cube);
  Mat M_expected(2, 2), S_expected(2, 2);
  M_expected << 1, 2, 2, 2;
  S_expected << 2, 2, 2, 2.5;
  EXPECT_EQ(M.data(), M_expected);
  EXPECT_EQ(S.data(), S_expected);
  // det M = -2: the second pivot fails
  try {
    block_cholesky(symmetrize_regularize(M, 0.0));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.block(), 1);
  }
}

TEST(Assembly, GramOfChebyshevSnapshots) {
  const int N = 30, m = 2, n = 5;
  const MatrixModel mm = matrix_model(N, m, n, 3);
  const Mat Un = stack(mm.u, n);
  const Mat M_oracle = Un.transpose() * Un;
  const Mat S_oracle = Un.transpose() * mm.A * Un;
  EXPECT_LT((assemble_mass(mm.cube).data() - M_oracle).norm(), 1e-12 * M_oracle.norm());
  EXPECT_LT((assemble_stiffness(mm.cube).data() - S_oracle).norm(), 1e-12 * S_oracle.norm());
}

TEST(Assembly, NeedsEnoughLags) {
  DataCube cube;
  cube.m = 1;
  cube.D.assign(3, Mat::Ones(1, 1));
  EXPECT_NO_THROW(assemble_mass(cube, 2));
  EXPECT_THROW(assemble_stiffness(cube, 2), InvalidArgument);
}

TEST(CosineRecursion, ScalarChebyshev) {
  const double theta = 0.37;
  const auto u = cosine_recursion(Mat::Constant(1, 1, std::cos(theta)), Mat::Ones(1, 1), 25);
  for (int j = 0; j <= 25; ++j) EXPECT_NEAR(u[j](0, 0), std::cos(j * theta), 1e-13);
}

TEST(BlockCholesky, MatchesDenseFactorAt400) {
  const int n = 20, m = 20;
  std::mt19937 rng(11);
  std::normal_distribution<double> N01;
  const Mat X = Mat::NullaryExpr(n * m, n * m, [&]() { return N01(rng); });
  const Mat A = X.transpose() * X + Mat::Identity(n * m, n * m);
  const BlockMatrix R = block_cholesky(BlockMatrix(n, m, A));
  EXPECT_EQ(R.tag(), BlockStructure::block_upper_triangular);
  const Mat dense_U = A.llt().matrixU();
  EXPECT_LT((R.data() - dense_U).norm(), 1e-10 * dense_U.norm());
  EXPECT_LT((R.data().transpose() * R.data() - A).norm(), 1e-12 * A.norm());
  EXPECT_GT(R.data().diagonal().minCoeff(), 0.0);
}

TEST(BlockCholesky, ReportsFailingBlockColumn) {
  const int n = 5, m = 3;
  Mat A = Mat::Identity(n * m, n * m);
  A(3 * m + 1, 3 * m + 1) = -1.0;
  try {
    block_cholesky(BlockMatrix(n, m, A));
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.block(), 3);
  }
}

TEST(FactorMass, EscalatesEps) {
  Mat A(2, 2);
  A << 1.0, 1.0, 1.0, 1.0 - 1e-3;
  const BlockMatrix M(2, 1, A);
  const MassFactor mf = factor_mass(M, 0.0, 4);
  EXPECT_DOUBLE_EQ(mf.eps, 1e-3);
  EXPECT_EQ(mf.retries, 4);
  EXPECT_THROW(factor_mass(M, 0.0, 3), NotPositiveDefinite);
  // A positive start value is multiplied by ten each time.
  EXPECT_DOUBLE_EQ(factor_mass(M, 1e-4, 4).eps, 1e-3);
}

TEST(SymmetrizeRegularize, ShiftsDiagonalBlocksByM00) {
  Mat A = Mat::Random(4, 4);
  const BlockMatrix M(2, 2, A);
  const BlockMatrix Mr = symmetrize_regularize(M, 0.5);
  const Mat sym = 0.5 * (A + A.transpose());
  EXPECT_TRUE(Mr.data().isApprox(Mr.data().transpose()));
  EXPECT_LT((Mr.block(1, 1) - sym.bottomRightCorner(2, 2) - 0.5 * sym.topLeftCorner(2, 2)).norm(), 1e-15);
  EXPECT_LT((Mr.block(0, 1) - sym.topRightCorner(2, 2)).norm(), 1e-15);
}

TEST(Rom, ReproducesAllStoredLags) {
  const int N = 30, m = 2, n = 5;
  const MatrixModel mm = matrix_model(N, m, n, 5);
  const RomModel rom = build_rom(mm.cube, 0.0);
  const auto u_rom = rom_step(rom.P, rom.R, 2 * n - 1);
  for (int j = 0; j < 2 * n; ++j) {
    const Mat D_rom = u_rom[0].transpose() * u_rom[j];
    EXPECT_LT((D_rom - mm.cube[j]).norm(), 1e-9 * mm.cube[0].norm()) << "j = " << j;
  }
}

TEST(Rom, GalerkinCoefficientsAgreeWithRomStep) {
  const int N = 30, m = 2, n = 5;
  const MatrixModel mm = matrix_model(N, m, n, 9);
  const RomModel rom = build_rom(mm.cube, 0.0);
  const BlockMatrix I = BlockMatrix::identity(n, m);
  const int J = 3 * n;
  const auto g = galerkin_extend(rom.M, rom.S, I.unit_block_column(n - 2), I.unit_block_column(n - 1), J);
  ASSERT_EQ(static_cast<int>(g.size()), J - n + 1);
  const auto u_rom = rom_step(rom.P, rom.R, J);
  for (int j = 0; j < n; ++j) EXPECT_LT((u_rom[j] - rom.R.data() * I.unit_block_column(j)).norm(), 1e-9) << j;
  for (int j = n; j <= J; ++j) {
    const Mat via_galerkin = rom.R.data() * g[j - n];
    EXPECT_LT((u_rom[j] - via_galerkin).norm(), 1e-8 * u_rom[0].norm()) << j;
  }
  // Galerkin data for lags beyond the stored ones: g_0^T M g_j.
  const Mat D_2n = I.unit_block_column(0).transpose() * rom.M.data() * g[n];
  EXPECT_TRUE(D_2n.allFinite());
}

TEST(Rom, PropagatorSymmetricAndContracting) {
  const MatrixModel mm = matrix_model(30, 2, 5, 1);
  const RomModel rom = build_rom(mm.cube, 0.0);
  EXPECT_LT((rom.P.data() - rom.P.data().transpose()).norm(), 1e-14 * rom.P.data().norm());
  const Eigen::SelfAdjointEigenSolver<Mat> es(rom.P.data());
  // Ritz values of A lie inside its spectrum.
  EXPECT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-9);
}
