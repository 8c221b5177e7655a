#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rwi/core.hpp"
#include "rwi/signal.hpp"

namespace rwi {

/// soft: pressure release (p = 0); hard: zero normal derivative.
enum class EdgeCondition { soft, hard };

/// Boundary conditions per edge. The top edge is the one next to grid row 0.
///
/// Each edge sits half a cell outside the outermost node row/column. A hard edge mirrors the
/// outermost node into its ghost; a soft edge holds the ghost at zero. Every grid node is an
/// unknown, so the discrete operator stays symmetric under the h^2 node quadrature, corners included.
struct BoundarySpec {
  EdgeCondition top = EdgeCondition::hard;
  EdgeCondition bottom = EdgeCondition::soft;
  EdgeCondition left = EdgeCondition::soft;
  EdgeCondition right = EdgeCondition::soft;
};

/// What to keep from one simulation.
struct RecordSpec {
  std::vector<int> receivers;     // flat node indices whose time series are kept
  long trace_begin = 0;           // first fine step of the traces
  long trace_end = -1;            // last fine step (inclusive); empty when < trace_begin
  std::vector<long> field_steps;  // fine steps at which full fields are copied out
};

struct FdtdResult {
  long trace_begin = 0;
  Mat traces;               // (trace_end - trace_begin + 1) x receivers
  std::vector<Vec> fields;  // one per RecordSpec::field_steps entry, same order
};

/// Leapfrog solution of p_tt - c^2 lap p = s(t) delta_h(x - x_src), delta_h = 1/h^2,
/// from zero fields at time_grid.first_step(); source values come from source.at_step(k).
/// Runs until the last step any record needs.
FdtdResult fdtd_run(const Medium& medium, int source_node, const SampledSignal& source,
                    const BoundarySpec& boundaries, const TimeGrid& time_grid, const RecordSpec& record);

/// Convenience overload taking a sensor of `array`.
FdtdResult fdtd_run(const Medium& medium, const SensorArray& array, int source_index, const SampledSignal& source,
                    const BoundarySpec& boundaries, const TimeGrid& time_grid, const RecordSpec& record);

/// Discrete centred-difference source for an even pulse: zero-padded derivative on the fine grid.
SampledSignal source_from_pulse(const SampledSignal& pulse);

/// Data matrices D_j = D(j tau), j = 0 .. 2n - 1, each m x m.
struct DataCube {
  int m = 0;
  double tau = 0.0;
  std::vector<Mat> D;

  int n() const { return static_cast<int>(D.size()) / 2; }
  int count() const { return static_cast<int>(D.size()); }
  const Mat& operator[](int j) const { return D.at(static_cast<std::size_t>(j)); }
};

/// Array response to sources driven by f', correlated with f and folded to even time.
DataCube make_data_cube(const Medium& medium, const SensorArray& array, const PulseSpec& pulse,
                        const TimeGrid& time_grid, const BoundarySpec& boundaries = {});

enum class SnapshotKind { true_u, reference_u, estimated_u };

/// n fields per source on the grid, sampled at j tau. Column j * m + s holds source s at step j.
struct SnapshotSet {
  Grid2D grid{2, 2, 1.0};
  int n = 0;
  int m = 0;
  double tau = 0.0;
  SnapshotKind kind = SnapshotKind::true_u;
  Mat u;
  std::optional<Mat> du;  // time derivative, same layout

  int column(int j, int s) const { return j * m + s; }
  auto field(int j, int s) const { return u.col(column(j, s)); }
};

/// Even snapshots u(j tau) = zeta(j tau) + zeta(-j tau), zeta = (c_bar / c) p, with p driven by
/// the derivative of `frak_f` (sampled on time_grid.dt). Optionally also centred time derivatives.
SnapshotSet make_snapshots(const Medium& medium, const SensorArray& array, const SampledSignal& frak_f,
                           const TimeGrid& time_grid, bool with_derivative, const BoundarySpec& boundaries = {});

/// Adds i.i.d. Gaussian noise to D_1 .. D_{2n-1}; D_0 is left alone.
DataCube add_noise(const DataCube& cube, double level, std::uint64_t seed);

/// Discrete wave energy between steps k and k + 1 for two consecutive fields of the symmetrized
/// variable zeta; conserved exactly by the leapfrog scheme once the source is off.
double discrete_energy(const Medium& medium, const BoundarySpec& boundaries, double dt, const Vec& p_now,
                       const Vec& p_next);

}  // namespace rwi
