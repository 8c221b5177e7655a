#include <gtest/gtest.h>

#include <cmath>

#include "rwi/basis.hpp"

using namespace rwi;

namespace {

const Grid2D kGrid(61, 51, 0.05);
const Rect kOmega{0.5, 2.5, 0.6, 2.1};

Vec row_sums(const SearchBasis& b) { return b.values * Vec::Ones(b.size()); }

}  // namespace

TEST(HatBasis, PartitionOfUnityAwayFromEdges) {
  const double dz = 0.25, dx = 0.5;
  const SearchBasis b = hat_basis(kGrid, kOmega, dz, dx);
  EXPECT_EQ(b.size(), (4 - 1) * (6 - 1));
  const Vec sums = row_sums(b);
  int checked = 0;
  for (int q = 0; q < kGrid.size(); ++q) {
    const Point2 p = kGrid.position(q);
    if (p.x >= kOmega.x0 + dx - 1e-9 && p.x <= kOmega.x1 - dx + 1e-9 && p.z >= kOmega.z0 + dz - 1e-9 &&
        p.z <= kOmega.z1 - dz + 1e-9) {
      EXPECT_NEAR(sums[q], 1.0, 1e-12) << p.x << "," << p.z;
      ++checked;
    }
    if (!kOmega.contains(p)) EXPECT_EQ(sums[q], 0.0);
  }
  EXPECT_GT(checked, 100);
}

TEST(HatBasis, PeakOnItsMeshNode) {
  const SearchBasis b = hat_basis(kGrid, kOmega, 0.25, 0.5);
  for (int q = 0; q < b.size(); ++q) {
    const NodeIndex n = kGrid.nearest_node(b.centers[q]);
    EXPECT_NEAR(b.values.coeff(kGrid.index(n), q), 1.0, 1e-9);
    EXPECT_LE(b.values.col(q).sum(), (0.5 / 0.05) * (0.25 / 0.05) + 1e-9);  // area / h^2
  }
}

TEST(PixelBasis, EveryNodeInOneCell) {
  const SearchBasis b = pixel_basis(kGrid, kOmega, 0.25);
  EXPECT_EQ(b.size(), 8 * 6);
  const Vec sums = row_sums(b);
  for (int q = 0; q < kGrid.size(); ++q) EXPECT_EQ(sums[q], kOmega.contains(kGrid.position(q)) ? 1.0 : 0.0);
}

TEST(GaussianBasis, MatchingWidthHasHatHalfMaximum) {
  const double s = matching_sigma(0.4);
  EXPECT_NEAR(std::exp(-0.5 * (0.2 / s) * (0.2 / s)), 0.5, 1e-14);
}

TEST(GaussianBasis, CutoffAndSupport) {
  const double sr = 0.1, sc = 0.2, cut = 2.0;
  const SearchBasis b = gaussian_basis(kGrid, kOmega, 0.25, 0.5, sr, sc, cut);
  for (int q = 0; q < b.size(); ++q) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(b.values, q); it; ++it) {
      const Point2 p = kGrid.position(static_cast<int>(it.row()));
      const double ux = (p.x - b.centers[q].x) / sc, uz = (p.z - b.centers[q].z) / sr;
      EXPECT_LE(ux * ux + uz * uz, cut * cut + 1e-9);
      EXPECT_TRUE(kOmega.contains(p));
      EXPECT_NEAR(it.value(), std::exp(-0.5 * (ux * ux + uz * uz)), 1e-14);
    }
  }
}

TEST(MakeBasis, DispatchAndDefaults) {
  BasisParams p;
  p.range_spacing = 0.25;
  p.cross_spacing = 0.5;
  p.pixel_size = 0.5;
  EXPECT_EQ(make_basis(BasisKind::hat, kGrid, kOmega, p).size(), 15);
  EXPECT_EQ(make_basis(BasisKind::gaussian, kGrid, kOmega, p).size(), 15);
  EXPECT_EQ(make_basis(BasisKind::pixel, kGrid, kOmega, p).kind, BasisKind::pixel);
  for (BasisKind k : {BasisKind::hat, BasisKind::gaussian, BasisKind::pixel}) EXPECT_EQ(parse_basis_kind(to_string(k)), k);
  EXPECT_THROW(parse_basis_kind("spline"), InvalidArgument);
}

TEST(MakeBasis, RejectsDegenerateMeshes) {
  EXPECT_THROW(hat_basis(kGrid, kOmega, 2.0, 0.5), InvalidArgument);
  EXPECT_THROW(hat_basis(kGrid, kOmega, 0.0, 0.5), InvalidArgument);
  // Cells smaller than the grid step leave functions without nodes.
  EXPECT_THROW(pixel_basis(kGrid, kOmega, 0.01), InvalidArgument);
}
