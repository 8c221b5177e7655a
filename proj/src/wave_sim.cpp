#include "rwi/wave_sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace rwi {

namespace {

// Field stored with a one-node ghost ring; interior node (i, k) lives at (i + 1, k + 1).
class PaddedField {
 public:
  explicit PaddedField(const Grid2D& g) : nx_(g.nx()), nz_(g.nz()), stride_(g.nx() + 2), data_((g.nx() + 2) * (g.nz() + 2), 0.0) {}

  double& at(int i, int k) { return data_[(k + 1) * stride_ + (i + 1)]; }
  double at(int i, int k) const { return data_[(k + 1) * stride_ + (i + 1)]; }
  int stride() const { return stride_; }
  double* row(int k) { return data_.data() + (k + 1) * stride_ + 1; }
  const double* row(int k) const { return data_.data() + (k + 1) * stride_ + 1; }

  void fill_ghosts(const BoundarySpec& b) {
    for (int i = 0; i < nx_; ++i) {
      at(i, -1) = b.top == EdgeCondition::hard ? at(i, 0) : 0.0;
      at(i, nz_) = b.bottom == EdgeCondition::hard ? at(i, nz_ - 1) : 0.0;
    }
    for (int k = 0; k < nz_; ++k) {
      at(-1, k) = b.left == EdgeCondition::hard ? at(0, k) : 0.0;
      at(nx_, k) = b.right == EdgeCondition::hard ? at(nx_ - 1, k) : 0.0;
    }
  }

  Vec interior() const {
    Vec v(nx_ * nz_);
    for (int k = 0; k < nz_; ++k)
      for (int i = 0; i < nx_; ++i) v[k * nx_ + i] = at(i, k);
    return v;
  }

  void set_interior(const Vec& v) {
    for (int k = 0; k < nz_; ++k)
      for (int i = 0; i < nx_; ++i) at(i, k) = v[k * nx_ + i];
  }

  bool finite() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return std::isfinite(s);
  }

  void swap(PaddedField& o) { data_.swap(o.data_); }

 private:
  int nx_, nz_, stride_;
  std::vector<double> data_;
};

// h^2 * discrete Laplacian of p at interior node (i, k); ghosts must be current.
inline double laplace_h2(const PaddedField& p, int i, int k) {
  return p.at(i + 1, k) + p.at(i - 1, k) + p.at(i, k + 1) + p.at(i, k - 1) - 4.0 * p.at(i, k);
}

void check_cfl(const Medium& medium, double dt) {
  const double courant = dt * medium.c_max() * std::numbers::sqrt2 / medium.grid().h();
  if (courant > 1.0)
    throw StabilityError(fmt::format("time step {} violates the CFL bound (Courant number {:.4f} > 1)", dt, courant));
}

long half_support(const SampledSignal& s) { return static_cast<long>(s.size() / 2); }

}  // namespace

FdtdResult fdtd_run(const Medium& medium, int source_node, const SampledSignal& source,
                    const BoundarySpec& boundaries, const TimeGrid& tg, const RecordSpec& record) {
  const Grid2D& g = medium.grid();
  if (source_node < 0 || source_node >= g.size())
    throw InvalidArgument(fmt::format("source node {} is outside the grid", source_node));
  for (int r : record.receivers)
    if (r < 0 || r >= g.size()) throw InvalidArgument(fmt::format("receiver node {} is outside the grid", r));
  if (!(tg.dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (std::abs(source.dt - tg.dt) > 1e-12 * tg.dt)
    throw InvalidArgument(fmt::format("source sampled at dt = {} but the simulation uses dt = {}", source.dt, tg.dt));
  const long first = tg.first_step();
  if (source.size() > 0 && source.first_step() < first)
    throw InvalidArgument("source signal starts before the simulation does");
  check_cfl(medium, tg.dt);

  long last = first;
  if (record.trace_end >= record.trace_begin) last = std::max(last, record.trace_end);
  for (long s : record.field_steps) last = std::max(last, s);

  FdtdResult out;
  out.trace_begin = record.trace_begin;
  const long trace_len = std::max<long>(0, record.trace_end - record.trace_begin + 1);
  out.traces = Mat::Zero(trace_len, static_cast<Eigen::Index>(record.receivers.size()));
  out.fields.assign(record.field_steps.size(), Vec::Zero(g.size()));

  std::multimap<long, std::size_t> wanted;
  for (std::size_t q = 0; q < record.field_steps.size(); ++q) wanted.emplace(record.field_steps[q], q);

  const int nx = g.nx(), nz = g.nz();
  const double h2 = g.h() * g.h();
  const double dt2 = tg.dt * tg.dt;
  std::vector<double> coef(g.size());
  for (int q = 0; q < g.size(); ++q) coef[q] = dt2 * medium.c()[q] * medium.c()[q] / h2;
  const NodeIndex src = g.node(source_node);

  PaddedField prev(g), cur(g), next(g);
  auto emit = [&](long step, const PaddedField& p) {
    const long t = step - record.trace_begin;
    if (t >= 0 && t < trace_len)
      for (std::size_t r = 0; r < record.receivers.size(); ++r) {
        const NodeIndex n = g.node(record.receivers[r]);
        out.traces(t, static_cast<Eigen::Index>(r)) = p.at(n.i, n.k);
      }
    auto [lo, hi] = wanted.equal_range(step);
    for (auto it = lo; it != hi; ++it) out.fields[it->second] = p.interior();
  };

  // Fields are zero at `first` and `first - 1`.
  emit(first, cur);
  for (long k = first; k < last; ++k) {
    cur.fill_ghosts(boundaries);
    for (int kk = 0; kk < nz; ++kk) {
      for (int i = 0; i < nx; ++i) {
        next.at(i, kk) = 2.0 * cur.at(i, kk) - prev.at(i, kk) + coef[kk * nx + i] * laplace_h2(cur, i, kk);
      }
    }
    next.at(src.i, src.k) += dt2 * source.at_step(k) / h2;
    prev.swap(cur);
    cur.swap(next);
    if ((k - first) % 64 == 0 && !cur.finite())
      throw DivergenceError(k + 1, fmt::format("non-finite field at step {}", k + 1));
    emit(k + 1, cur);
  }
  if (!cur.finite()) throw DivergenceError(last, fmt::format("non-finite field at step {}", last));
  return out;
}

FdtdResult fdtd_run(const Medium& medium, const SensorArray& array, int source_index, const SampledSignal& source,
                    const BoundarySpec& boundaries, const TimeGrid& time_grid, const RecordSpec& record) {
  if (source_index < 0 || source_index >= array.m())
    throw IndexError(fmt::format("source index {} out of range for {} sensors", source_index, array.m()));
  return fdtd_run(medium, array.flat()[source_index], source, boundaries, time_grid, record);
}

SampledSignal source_from_pulse(const SampledSignal& pulse) { return derivative(pad(pulse, 2)); }

DataCube make_data_cube(const Medium& medium, const SensorArray& array, const PulseSpec& pulse,
                        const TimeGrid& tg, const BoundarySpec& boundaries) {
  medium.check_known_near_array(array.row(), 0.0);
  const SampledSignal f = sample_pulse_f(pulse, tg.dt, tg.t_F);
  const SampledSignal src = source_from_pulse(f);
  const long L = half_support(f);
  const int m = array.m();
  const int count = 2 * tg.n;
  const long J = tg.step_of(count - 1);

  RecordSpec rec;
  rec.receivers = array.flat();
  rec.trace_begin = -J - L;
  rec.trace_end = J + L;

  DataCube cube;
  cube.m = m;
  cube.tau = tg.tau;
  cube.D.assign(count, Mat::Zero(m, m));
  std::vector<Mat> per_source(m);
  parallel_for(m, [&](int s) {
    const FdtdResult res = fdtd_run(medium, array, s, src, boundaries, tg, rec);
    // response(k) = dt * sum_l f_l p(k + l): correlation with the (even) pulse.
    auto response = [&](long k, int r) {
      double acc = 0.0;
      for (long l = -L; l <= L; ++l) acc += f.values[l + L] * res.traces(k + l - rec.trace_begin, r);
      return tg.dt * acc;
    };
    Mat col(count, m);
    for (int j = 0; j < count; ++j) {
      const long k = tg.step_of(j);
      for (int r = 0; r < m; ++r) col(j, r) = response(k, r) + response(-k, r);
    }
    per_source[s] = std::move(col);
  });
  for (int s = 0; s < m; ++s)
    for (int j = 0; j < count; ++j) cube.D[j].col(s) = per_source[s].row(j).transpose();
  return cube;
}

SnapshotSet make_snapshots(const Medium& medium, const SensorArray& array, const SampledSignal& frak_f,
                           const TimeGrid& tg, bool with_derivative, const BoundarySpec& boundaries) {
  medium.check_known_near_array(array.row(), 0.0);
  const SampledSignal src = source_from_pulse(frak_f);
  const Grid2D& g = medium.grid();
  const int m = array.m();
  const int n = tg.n;
  const long first = tg.first_step();

  // Steps of zeta needed for u(j tau) and, optionally, its centred derivative.
  std::vector<long> offsets{0};
  if (with_derivative) offsets = {0, -1, 1};
  RecordSpec rec;
  std::map<long, std::size_t> slot;
  for (int j = 0; j < n; ++j) {
    for (long sign : {1L, -1L}) {
      for (long o : offsets) {
        const long step = sign * tg.step_of(j) + o;
        if (step < first || slot.count(step)) continue;
        slot[step] = rec.field_steps.size();
        rec.field_steps.push_back(step);
      }
    }
  }

  Vec scale(g.size());
  for (int q = 0; q < g.size(); ++q) scale[q] = medium.c_bar() / medium.c()[q];

  SnapshotSet set;
  set.grid = g;
  set.n = n;
  set.m = m;
  set.tau = tg.tau;
  set.kind = SnapshotKind::true_u;
  set.u = Mat::Zero(g.size(), n * m);
  if (with_derivative) set.du = Mat::Zero(g.size(), n * m);

  parallel_for(m, [&](int s) {
    const FdtdResult res = fdtd_run(medium, array, s, src, boundaries, tg, rec);
    auto zeta = [&](long step) -> Vec {
      auto it = slot.find(step);
      if (it == slot.end()) return Vec::Zero(g.size());
      return scale.cwiseProduct(res.fields[it->second]);
    };
    for (int j = 0; j < n; ++j) {
      const long k = tg.step_of(j);
      set.u.col(set.column(j, s)) = zeta(k) + zeta(-k);
      if (with_derivative) {
        (*set.du).col(set.column(j, s)) = (zeta(k + 1) - zeta(k - 1) + zeta(-k - 1) - zeta(-k + 1)) / (2.0 * tg.dt);
      }
    }
  });
  return set;
}

DataCube add_noise(const DataCube& cube, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw InvalidArgument("noise level must be nonnegative");
  DataCube out = cube;
  if (level == 0.0) return out;
  double total = 0.0;
  for (const Mat& D : cube.D) total += D.squaredNorm();
  const double m = cube.m;
  const double variance = level * level / (static_cast<double>(cube.count()) * m * m) * total;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (int j = 1; j < out.count(); ++j)
    for (Eigen::Index c = 0; c < out.D[j].cols(); ++c)
      for (Eigen::Index r = 0; r < out.D[j].rows(); ++r) out.D[j](r, c) += normal(rng);
  return out;
}

double discrete_energy(const Medium& medium, const BoundarySpec& boundaries, double dt, const Vec& p_now,
                       const Vec& p_next) {
  const Grid2D& g = medium.grid();
  if (p_now.size() != g.size() || p_next.size() != g.size()) throw InvalidArgument("field size does not match grid");
  const double h2 = g.h() * g.h();
  const Vec scale = medium.c().cwiseInverse() * medium.c_bar();
  PaddedField p(g);
  p.set_interior(p_now);
  p.fill_ghosts(boundaries);
  double kinetic = 0.0, potential = 0.0;
  for (int k = 0; k < g.nz(); ++k) {
    for (int i = 0; i < g.nx(); ++i) {
      const int q = g.index(i, k);
      const double z0 = scale[q] * p_now[q];
      const double z1 = scale[q] * p_next[q];
      kinetic += (z1 - z0) * (z1 - z0) / (dt * dt);
      // zeta-operator: -c lap (c zeta) = -c c_bar lap p
      potential += z1 * (-medium.c()[q] * medium.c_bar() * laplace_h2(p, i, k) / h2);
    }
  }
  return 0.5 * h2 * (kinetic + potential);
}

}  // namespace rwi
