#include "rwi/basis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace rwi {

namespace {

struct Mesh1D {
  double origin;
  double step;
  int cells;
};

Mesh1D mesh_over(double a, double b, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("basis spacing must be positive");
  const int cells = std::max(1, static_cast<int>(std::lround((b - a) / spacing)));
  return {a, (b - a) / cells, cells};
}

SearchBasis from_triplets(BasisKind kind, const Grid2D& grid, int count, std::vector<Eigen::Triplet<double>>& t,
                          std::vector<Point2> centers) {
  SearchBasis out;
  out.kind = kind;
  out.values.resize(grid.size(), count);
  out.values.setFromTriplets(t.begin(), t.end());
  out.values.makeCompressed();
  out.centers = std::move(centers);
  for (int q = 0; q < count; ++q) {
    if (out.values.col(q).nonZeros() == 0)
      throw InvalidArgument(fmt::format("basis function {} covers no grid node; refine the grid or coarsen the basis", q));
  }
  return out;
}

template <typename Fn>
SearchBasis mesh_basis(BasisKind kind, const Grid2D& grid, const Rect& omega, double range_spacing,
                       double cross_spacing, double reach_x, double reach_z, Fn&& value) {
  const Mesh1D mx = mesh_over(omega.x0, omega.x1, cross_spacing);
  const Mesh1D mz = mesh_over(omega.z0, omega.z1, range_spacing);
  if (mx.cells < 2 || mz.cells < 2) throw InvalidArgument("inversion subdomain is too small for the basis mesh");
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<Point2> centers;
  int q = 0;
  const double h = grid.h();
  for (int b = 1; b < mz.cells; ++b) {
    for (int a = 1; a < mx.cells; ++a, ++q) {
      const Point2 c{mx.origin + a * mx.step, mz.origin + b * mz.step};
      centers.push_back(c);
      const int i0 = std::max(0, static_cast<int>(std::floor((c.x - reach_x - grid.origin().x) / h)));
      const int i1 = std::min(grid.nx() - 1, static_cast<int>(std::ceil((c.x + reach_x - grid.origin().x) / h)));
      const int k0 = std::max(0, static_cast<int>(std::floor((c.z - reach_z - grid.origin().z) / h)));
      const int k1 = std::min(grid.nz() - 1, static_cast<int>(std::ceil((c.z + reach_z - grid.origin().z) / h)));
      for (int k = k0; k <= k1; ++k) {
        for (int i = i0; i <= i1; ++i) {
          const Point2 p = grid.position(i, k);
          if (!omega.contains(p)) continue;
          const double v = value(p, c, mx.step, mz.step);
          if (v > 0.0) trip.emplace_back(grid.index(i, k), q, v);
        }
      }
    }
  }
  return from_triplets(kind, grid, q, trip, std::move(centers));
}

}  // namespace

BasisKind parse_basis_kind(const std::string& name) {
  if (name == "hat") return BasisKind::hat;
  if (name == "gaussian") return BasisKind::gaussian;
  if (name == "pixel") return BasisKind::pixel;
  throw InvalidArgument(fmt::format("unknown basis '{}' (expected hat, gaussian or pixel)", name));
}

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::hat: return "hat";
    case BasisKind::gaussian: return "gaussian";
    case BasisKind::pixel: return "pixel";
  }
  return "?";
}

double matching_sigma(double spacing) { return spacing / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

SearchBasis hat_basis(const Grid2D& grid, const Rect& omega_in, double range_spacing, double cross_spacing) {
  return mesh_basis(BasisKind::hat, grid, omega_in, range_spacing, cross_spacing, cross_spacing * 1.01,
                    range_spacing * 1.01, [](Point2 p, Point2 c, double dx, double dz) {
                      const double wx = std::max(0.0, 1.0 - std::abs(p.x - c.x) / dx);
                      const double wz = std::max(0.0, 1.0 - std::abs(p.z - c.z) / dz);
                      return wx * wz;
                    });
}

SearchBasis gaussian_basis(const Grid2D& grid, const Rect& omega_in, double range_spacing, double cross_spacing,
                           double sigma_range, double sigma_cross, double cutoff) {
  if (!(sigma_range > 0.0) || !(sigma_cross > 0.0)) throw InvalidArgument("gaussian widths must be positive");
  if (!(cutoff > 0.0)) throw InvalidArgument("gaussian cutoff must be positive");
  return mesh_basis(BasisKind::gaussian, grid, omega_in, range_spacing, cross_spacing, cutoff * sigma_cross,
                    cutoff * sigma_range, [&](Point2 p, Point2 c, double, double) {
                      const double ux = (p.x - c.x) / sigma_cross;
                      const double uz = (p.z - c.z) / sigma_range;
                      if (ux * ux + uz * uz > cutoff * cutoff) return 0.0;
                      return std::exp(-0.5 * (ux * ux + uz * uz));
                    });
}

SearchBasis pixel_basis(const Grid2D& grid, const Rect& omega_in, double cell) {
  const Mesh1D mx = mesh_over(omega_in.x0, omega_in.x1, cell);
  const Mesh1D mz = mesh_over(omega_in.z0, omega_in.z1, cell);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<Point2> centers;
  for (int b = 0; b < mz.cells; ++b)
    for (int a = 0; a < mx.cells; ++a) centers.push_back({mx.origin + (a + 0.5) * mx.step, mz.origin + (b + 0.5) * mz.step});
  auto cell_of = [](double v, const Mesh1D& m) {
    return std::clamp(static_cast<int>(std::floor((v - m.origin) / m.step)), 0, m.cells - 1);
  };
  for (int q = 0; q < grid.size(); ++q) {
    const Point2 p = grid.position(q);
    if (!omega_in.contains(p)) continue;
    trip.emplace_back(q, cell_of(p.z, mz) * mx.cells + cell_of(p.x, mx), 1.0);
  }
  return from_triplets(BasisKind::pixel, grid, mx.cells * mz.cells, trip, std::move(centers));
}

SearchBasis make_basis(BasisKind kind, const Grid2D& grid, const Rect& omega_in, const BasisParams& p) {
  switch (kind) {
    case BasisKind::hat: return hat_basis(grid, omega_in, p.range_spacing, p.cross_spacing);
    case BasisKind::gaussian:
      return gaussian_basis(grid, omega_in, p.range_spacing, p.cross_spacing,
                            p.sigma_range > 0.0 ? p.sigma_range : matching_sigma(p.range_spacing),
                            p.sigma_cross > 0.0 ? p.sigma_cross : matching_sigma(p.cross_spacing), p.gaussian_cutoff);
    case BasisKind::pixel: return pixel_basis(grid, omega_in, p.pixel_size);
  }
  throw InvalidArgument("unknown basis kind");
}

}  // namespace rwi
