#include "rwi/internal_wave.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace rwi {

BlockMatrix snapshot_gram(const SnapshotSet& U) {
  const double h2 = U.grid.h() * U.grid.h();
  Mat G(U.u.cols(), U.u.cols());
  G.setZero();
  G.selfadjointView<Eigen::Lower>().rankUpdate(U.u.transpose(), h2);
  Mat full = G.selfadjointView<Eigen::Lower>();
  return BlockMatrix(U.n, U.m, std::move(full), BlockStructure::symmetric);
}

ReferenceBasis build_reference_basis(const SnapshotSet& U_ref, double eps, int max_retries) {
  if (U_ref.u.cols() != U_ref.n * U_ref.m || U_ref.u.rows() != U_ref.grid.size())
    throw InvalidArgument("snapshot set has inconsistent dimensions");
  MassFactor mf = factor_mass(snapshot_gram(U_ref), eps, max_retries);
  ReferenceBasis b;
  b.grid = U_ref.grid;
  b.n = U_ref.n;
  b.m = U_ref.m;
  b.tau = U_ref.tau;
  // V = U R^{-1}  <=>  V^T = R^{-T} U^T
  b.V = mf.R.data().transpose().triangularView<Eigen::Lower>().solve(U_ref.u.transpose()).transpose();
  b.M_ref = std::move(mf.M);
  b.R_ref = std::move(mf.R);
  b.eps = mf.eps;
  return b;
}

namespace {

SnapshotSet combine(const ReferenceBasis& basis, const BlockMatrix& R, SnapshotKind kind) {
  if (R.nblocks() != basis.n || R.block_size() != basis.m)
    throw InvalidArgument(fmt::format("factor has {} blocks of size {}, basis has {} of size {}", R.nblocks(),
                                      R.block_size(), basis.n, basis.m));
  SnapshotSet s;
  s.grid = basis.grid;
  s.n = basis.n;
  s.m = basis.m;
  s.tau = basis.tau;
  s.kind = kind;
  s.u = basis.V * R.data().triangularView<Eigen::Upper>();
  return s;
}

}  // namespace

SnapshotSet estimate_internal(const ReferenceBasis& basis, const BlockMatrix& R) {
  return combine(basis, R, SnapshotKind::estimated_u);
}

SnapshotSet reference_internal(const ReferenceBasis& basis) {
  return combine(basis, basis.R_ref, SnapshotKind::reference_u);
}

DatafitReport check_datafit(const SnapshotSet& est, const DataCube& cube) {
  const int n = est.n, m = est.m;
  if (cube.m != m) throw InvalidArgument("cube and snapshots have different sensor counts");
  if (cube.count() < 2 * n - 1) throw InvalidArgument("cube is too short for the snapshot count");
  const double h2 = est.grid.h() * est.grid.h();
  auto block = [&](int j) { return est.u.middleCols(j * m, m); };
  auto rel = [](const Mat& diff, const Mat& ref) {
    const double den = ref.norm();
    return den > 0.0 ? diff.norm() / den : diff.norm();
  };
  DatafitReport rep;
  for (int j = 0; j < n; ++j) {
    const Mat g0 = h2 * block(0).transpose() * block(j);
    rep.first.push_back(rel(cube[j] - g0, cube[j]));
    const Mat lhs = cube[j + n - 1] + cube[n - 1 - j];
    const Mat g1 = 2.0 * h2 * block(n - 1).transpose() * block(j);
    rep.second.push_back(rel(lhs - g1, lhs));
  }
  rep.max_first = *std::max_element(rep.first.begin(), rep.first.end());
  rep.max_second = *std::max_element(rep.second.begin(), rep.second.end());
  return rep;
}

Mat interpolate_in_time(const SnapshotSet& set, double t) {
  const double T = (set.n - 1) * set.tau;
  if (!(t >= 0.0) || t > T * (1.0 + 1e-12))
    throw InvalidArgument(fmt::format("time {} is outside [0, {}]", t, T));
  const int m = set.m;
  const double x = t / set.tau;
  int j = std::min(static_cast<int>(std::floor(x)), set.n - 1);
  const double w = x - j;
  if (j == set.n - 1 || w == 0.0) return set.u.middleCols(j * m, m);
  return (1.0 - w) * set.u.middleCols(j * m, m) + w * set.u.middleCols((j + 1) * m, m);
}

double basis_distance(const ReferenceBasis& a, const ReferenceBasis& b) {
  if (a.V.rows() != b.V.rows() || a.V.cols() != b.V.cols()) throw InvalidArgument("bases differ in shape");
  return (a.V - b.V).norm() / b.V.norm();
}

}  // namespace rwi
