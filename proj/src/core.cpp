#include "rwi/core.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

namespace rwi {

Grid2D::Grid2D(int nx, int nz, double h, Point2 origin) : nx_(nx), nz_(nz), h_(h), origin_(origin) {
  if (nx < 2 || nz < 2) throw InvalidArgument(fmt::format("grid needs nx, nz >= 2 (got {} x {})", nx, nz));
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid spacing must be positive");
}

NodeIndex Grid2D::nearest_node(Point2 p) const {
  const int i = static_cast<int>(std::lround((p.x - origin_.x) / h_));
  const int k = static_cast<int>(std::lround((p.z - origin_.z) / h_));
  if (i < 0 || i >= nx_ || k < 0 || k >= nz_)
    throw IndexError(fmt::format("point ({}, {}) is outside the grid", p.x, p.z));
  return {i, k};
}

Medium::Medium(Grid2D grid, Vec c, double c_bar, Rect omega_in)
    : grid_(grid), c_(std::move(c)), c_bar_(c_bar), omega_in_(omega_in) {
  if (c_.size() != grid_.size())
    throw InvalidArgument(fmt::format("speed field has {} values for {} nodes", c_.size(), grid_.size()));
  if (!(c_bar > 0.0)) throw InvalidArgument("background speed must be positive");
  for (Eigen::Index q = 0; q < c_.size(); ++q) {
    if (!(c_[q] > 0.0) || !std::isfinite(c_[q]))
      throw InvalidArgument(fmt::format("wave speed must be positive and finite (node {})", q));
  }
  if (!(omega_in.x1 > omega_in.x0) || !(omega_in.z1 > omega_in.z0))
    throw InvalidArgument("inversion subdomain must have positive extent");
}

Medium Medium::homogeneous(Grid2D grid, double c_bar, Rect omega_in) {
  return Medium(grid, Vec::Constant(grid.size(), c_bar), c_bar, omega_in);
}

void Medium::check_known_near_array(int array_row, double distance) const {
  const double h = grid_.h();
  for (int k = 0; k < grid_.nz(); ++k) {
    for (int i = 0; i < grid_.nx(); ++i) {
      const double v = c_[grid_.index(i, k)];
      if (v == c_bar_) continue;
      const Point2 p = grid_.position(i, k);
      if (!omega_in_.contains(p))
        throw InvalidArgument(fmt::format("speed differs from background outside the inversion subdomain at ({}, {})",
                                          p.x, p.z));
      if (std::abs(k - array_row) * h < distance)
        throw InvalidArgument(fmt::format("speed differs from background within {} of the array at ({}, {})",
                                          distance, p.x, p.z));
    }
  }
}

std::vector<int> Medium::nodes_in_omega() const {
  std::vector<int> out;
  for (int q = 0; q < grid_.size(); ++q) {
    if (omega_in_.contains(grid_.position(q))) out.push_back(q);
  }
  return out;
}

SensorArray::SensorArray(const Grid2D& grid, std::vector<NodeIndex> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InvalidArgument("sensor array needs at least one sensor");
  std::set<int> seen;
  const int row = nodes_.front().k;
  for (const NodeIndex& n : nodes_) {
    if (n.k != row) throw InvalidArgument("all sensors must lie on the same grid row");
    if (n.i <= 0 || n.i >= grid.nx() - 1 || n.k < 0 || n.k >= grid.nz())
      throw InvalidArgument(fmt::format("sensor at node ({}, {}) is not strictly inside the top edge", n.i, n.k));
    const int flat = grid.index(n);
    if (!seen.insert(flat).second) throw InvalidArgument("sensor positions must be distinct");
    flat_.push_back(flat);
  }
}

SensorArray SensorArray::centered(const Grid2D& grid, int m, double spacing, double depth) {
  if (m < 1) throw InvalidArgument("sensor count must be positive");
  const double xc = grid.origin().x + 0.5 * (grid.nx() - 1) * grid.h();
  std::vector<NodeIndex> nodes;
  nodes.reserve(m);
  for (int s = 0; s < m; ++s) {
    const double x = xc + (s - 0.5 * (m - 1)) * spacing;
    nodes.push_back(grid.nearest_node({x, grid.origin().z + depth}));
  }
  return SensorArray(grid, std::move(nodes));
}

long TimeGrid::support_steps() const { return static_cast<long>(std::floor(t_F / dt + 1e-9)); }

double grid_spacing(double omega_c, double bandwidth, double c_bar) {
  if (!(omega_c > 0.0) || !(bandwidth > 0.0) || !(c_bar > 0.0))
    throw InvalidArgument("grid_spacing needs positive omega_c, bandwidth and c_bar");
  return std::numbers::pi * c_bar / (4.0 * (omega_c + bandwidth));
}

double cfl_dt(double h, double c_max, double safety) {
  if (!(c_max > 0.0)) throw InvalidArgument("c_max must be positive");
  if (!(h > 0.0)) throw InvalidArgument("h must be positive");
  if (!(safety > 0.0 && safety < 1.0)) throw InvalidArgument("CFL safety factor must lie in (0, 1)");
  return safety * h / (c_max * std::numbers::sqrt2);
}

TimeGrid make_time_grid(double tau, int n, double dt_max, double t_F) {
  if (!(tau > 0.0) || !(dt_max > 0.0)) throw InvalidArgument("tau and dt must be positive");
  const int steps = static_cast<int>(std::ceil(tau / dt_max - 1e-12));
  return make_time_grid_steps(tau, n, std::max(steps, 1), t_F);
}

TimeGrid make_time_grid_steps(double tau, int n, int steps_per_tau, double t_F) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (n < 1) throw InvalidArgument("snapshot count must be positive");
  if (steps_per_tau < 1) throw InvalidArgument("steps_per_tau must be positive");
  if (!(t_F >= 0.0)) throw InvalidArgument("t_F must be nonnegative");
  TimeGrid tg;
  tg.tau = tau;
  tg.n = n;
  tg.steps_per_tau = steps_per_tau;
  tg.dt = tau / steps_per_tau;
  tg.t_F = t_F;
  return tg;
}

BlockMatrix::BlockMatrix(int nblocks, int block_size, Mat data, BlockStructure tag)
    : nblocks_(nblocks), block_size_(block_size), data_(std::move(data)), tag_(tag) {
  if (nblocks < 1 || block_size < 1) throw InvalidArgument("block matrix needs positive block counts");
  if (data_.rows() != dim() || data_.cols() != dim())
    throw InvalidArgument(fmt::format("block matrix data is {}x{}, expected {}x{}", data_.rows(), data_.cols(), dim(),
                                      dim()));
  if (tag_ == BlockStructure::block_upper_triangular) {
    for (int i = 1; i < nblocks_; ++i) {
      for (int j = 0; j < i; ++j) {
        if (!data_.block(i * block_size_, j * block_size_, block_size_, block_size_).isZero(0.0))
          throw InvalidArgument(fmt::format("block ({}, {}) below the diagonal is nonzero", i, j));
      }
    }
  } else if (tag_ == BlockStructure::symmetric) {
    const double scale = std::max(data_.norm(), 1e-300);
    if ((data_ - data_.transpose()).norm() > 1e-12 * scale)
      throw InvalidArgument("matrix tagged symmetric is not symmetric");
  }
}

BlockMatrix BlockMatrix::zeros(int nblocks, int block_size, BlockStructure tag) {
  return BlockMatrix(nblocks, block_size, Mat::Zero(nblocks * block_size, nblocks * block_size), tag);
}

BlockMatrix BlockMatrix::identity(int nblocks, int block_size) {
  return BlockMatrix(nblocks, block_size, Mat::Identity(nblocks * block_size, nblocks * block_size),
                     BlockStructure::symmetric);
}

void BlockMatrix::check_index(int i, int j) const {
  if (i < 0 || j < 0 || i >= nblocks_ || j >= nblocks_)
    throw IndexError(fmt::format("block index ({}, {}) out of range for {} blocks", i, j, nblocks_));
}

Mat BlockMatrix::block(int i, int j) const {
  check_index(i, j);
  return data_.block(i * block_size_, j * block_size_, block_size_, block_size_);
}

void BlockMatrix::set_block(int i, int j, const Eigen::Ref<const Mat>& value) {
  check_index(i, j);
  if (value.rows() != block_size_ || value.cols() != block_size_) throw InvalidArgument("block has the wrong shape");
  data_.block(i * block_size_, j * block_size_, block_size_, block_size_) = value;
}

Mat BlockMatrix::unit_block_column(int j) const {
  if (j < 0 || j >= nblocks_) throw IndexError(fmt::format("block column {} out of range", j));
  Mat e = Mat::Zero(dim(), block_size_);
  e.block(j * block_size_, 0, block_size_, block_size_).setIdentity();
  return e;
}

int thread_count() {
  if (const char* env = std::getenv("RWI_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int q = 0; q < count; ++q) body(q);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int q = next++; q < count; q = next++) {
          try {
            body(q);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace rwi
