#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

#include "rwi/errors.hpp"

namespace rwi {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct Point2 {
  double x = 0.0;  // cross-range
  double z = 0.0;  // range (depth), increasing away from the array
};

struct NodeIndex {
  int i = 0;
  int k = 0;
  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

/// Uniform square mesh. Node (i, k) sits at origin + (i h, k h); k = 0 is the row next to the top edge.
class Grid2D {
 public:
  Grid2D(int nx, int nz, double h, Point2 origin = {});

  int nx() const { return nx_; }
  int nz() const { return nz_; }
  double h() const { return h_; }
  Point2 origin() const { return origin_; }
  int size() const { return nx_ * nz_; }

  int index(int i, int k) const { return k * nx_ + i; }
  int index(NodeIndex n) const { return index(n.i, n.k); }
  NodeIndex node(int flat) const { return {flat % nx_, flat / nx_}; }
  Point2 position(int i, int k) const { return {origin_.x + i * h_, origin_.z + k * h_}; }
  Point2 position(int flat) const {
    const NodeIndex n = node(flat);
    return position(n.i, n.k);
  }
  NodeIndex nearest_node(Point2 p) const;

  friend bool operator==(const Grid2D& a, const Grid2D& b) {
    return a.nx_ == b.nx_ && a.nz_ == b.nz_ && a.h_ == b.h_ && a.origin_.x == b.origin_.x &&
           a.origin_.z == b.origin_.z;
  }

 private:
  int nx_;
  int nz_;
  double h_;
  Point2 origin_;
};

/// Axis-aligned rectangle in physical coordinates (closed).
struct Rect {
  double x0 = 0.0, x1 = 0.0, z0 = 0.0, z1 = 0.0;
  bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.z >= z0 && p.z <= z1; }
  double width() const { return x1 - x0; }
  double height() const { return z1 - z0; }
};

/// Wave speed on grid nodes, with the known background speed and the inversion subdomain.
class Medium {
 public:
  Medium(Grid2D grid, Vec c, double c_bar, Rect omega_in);
  static Medium homogeneous(Grid2D grid, double c_bar, Rect omega_in);

  const Grid2D& grid() const { return grid_; }
  const Vec& c() const { return c_; }
  double c_bar() const { return c_bar_; }
  const Rect& omega_in() const { return omega_in_; }
  double c_max() const { return c_.maxCoeff(); }

  /// Same geometry, new speed field.
  Medium with_speed(Vec c) const { return Medium(grid_, std::move(c), c_bar_, omega_in_); }

  /// Throws InvalidArgument unless c == c_bar outside omega_in and within `distance` of the row `array_row`.
  void check_known_near_array(int array_row, double distance) const;

  /// Flat indices of the grid nodes inside omega_in.
  std::vector<int> nodes_in_omega() const;

 private:
  Grid2D grid_;
  Vec c_;
  double c_bar_;
  Rect omega_in_;
};

/// Co-located sources/receivers on one grid row near the top edge.
class SensorArray {
 public:
  SensorArray(const Grid2D& grid, std::vector<NodeIndex> nodes);
  /// m sensors centred on the grid, `spacing` apart, on the row nearest to depth `depth`.
  static SensorArray centered(const Grid2D& grid, int m, double spacing, double depth = 0.0);

  int m() const { return static_cast<int>(nodes_.size()); }
  const std::vector<NodeIndex>& nodes() const { return nodes_; }
  const std::vector<int>& flat() const { return flat_; }
  int row() const { return nodes_.front().k; }

 private:
  std::vector<NodeIndex> nodes_;
  std::vector<int> flat_;
};

/// ROM sampling step tau, snapshot count n, and the fine simulation step dt with tau = steps_per_tau * dt.
struct TimeGrid {
  double tau = 0.0;
  int n = 0;
  double dt = 0.0;
  int steps_per_tau = 0;
  double t_F = 0.0;  // half-width of the (truncated) source support

  /// Last fine-grid index inside [-t_F, t_F].
  long support_steps() const;
  /// Step at which simulations start from quiescent fields.
  long first_step() const { return -(support_steps() + 2); }
  long step_of(int j) const { return static_cast<long>(j) * steps_per_tau; }
};

/// h = pi c_bar / (4 (omega_c + B)).
double grid_spacing(double omega_c, double bandwidth, double c_bar);

/// Raw CFL step safety * h / (c_max sqrt 2), before divisibility rounding.
double cfl_dt(double h, double c_max, double safety = 0.5);

/// Rounds dt_max down so that tau / dt is an integer.
TimeGrid make_time_grid(double tau, int n, double dt_max, double t_F);
/// Explicit subdivision of tau.
TimeGrid make_time_grid_steps(double tau, int n, int steps_per_tau, double t_F);

enum class BlockStructure { general, block_upper_triangular, symmetric };

/// n x n grid of m x m blocks stored densely.
class BlockMatrix {
 public:
  BlockMatrix() : BlockMatrix(1, 1, Mat::Zero(1, 1)) {}
  BlockMatrix(int nblocks, int block_size, Mat data, BlockStructure tag = BlockStructure::general);
  static BlockMatrix zeros(int nblocks, int block_size, BlockStructure tag = BlockStructure::general);
  static BlockMatrix identity(int nblocks, int block_size);

  int nblocks() const { return nblocks_; }
  int block_size() const { return block_size_; }
  int dim() const { return nblocks_ * block_size_; }
  const Mat& data() const { return data_; }
  BlockStructure tag() const { return tag_; }

  Mat block(int i, int j) const;
  void set_block(int i, int j, const Eigen::Ref<const Mat>& value);
  /// Block column j of the identity, (n m) x m.
  Mat unit_block_column(int j) const;

 private:
  void check_index(int i, int j) const;

  int nblocks_;
  int block_size_;
  Mat data_;
  BlockStructure tag_;
};

/// Worker count from RWI_THREADS, else hardware concurrency.
int thread_count();

/// Runs body(0..count-1) over a small thread pool; exceptions are rethrown on the caller.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace rwi
