#include "rwi/inversion.hpp"

#include <fmt/format.h>

#include <cmath>

#include "rwi/internal_wave.hpp"
#include "rwi/regularization.hpp"
#include "rwi/rom.hpp"

namespace rwi {

Vec rho_of_speeds(const Vec& c, const Vec& c_ref) {
  if (c.size() != c_ref.size()) throw InvalidArgument("speed fields differ in size");
  if (!(c.minCoeff() > 0.0) || !(c_ref.minCoeff() > 0.0)) throw InvalidArgument("speeds must be positive");
  return ((c.array().square() - c_ref.array().square()) / (c.array() * c_ref.array())).matrix();
}

Vec speed_of_rho(const Vec& rho, const Vec& c_ref) {
  if (rho.size() != c_ref.size()) throw InvalidArgument("rho and c_ref differ in size");
  if (!(c_ref.minCoeff() > 0.0)) throw InvalidArgument("reference speed must be positive");
  return (0.5 * c_ref.array() * (rho.array() + (4.0 + rho.array().square()).sqrt())).matrix();
}

namespace {

// Largest factor by which an iterate may force the simulation step below the data step.
constexpr double kMaxRefinement = 16.0;

// m x m matrices tau * sum_l w_l G[(j - l) m + r, l m + s] for j = 0 .. n-1, trapezoid weights in l.
std::vector<Mat> fold_convolution(const Mat& G, int n, int m, double tau) {
  std::vector<Mat> out(n, Mat::Zero(m, m));
  for (int j = 1; j < n; ++j) {
    Mat& acc = out[j];
    for (int l = 0; l <= j; ++l) {
      const double w = (l == 0 || l == j) ? 0.5 : 1.0;
      acc += w * G.block((j - l) * m, l * m, m, m);
    }
    acc *= tau;
  }
  return out;
}

// du^T diag(weight h^2) u restricted to the nodes where weight is nonzero.
Mat weighted_cross_gram(const std::vector<std::pair<int, double>>& support, const Mat& u, const Mat& du, double h2) {
  const Eigen::Index cols = u.cols();
  Mat Us(support.size(), cols), Ds(support.size(), cols);
  for (std::size_t a = 0; a < support.size(); ++a) {
    Us.row(a) = support[a].second * h2 * u.row(support[a].first);
    Ds.row(a) = du.row(support[a].first);
  }
  return Ds.transpose() * Us;
}

void check_pair(const SnapshotSet& u, const SnapshotSet& du_ref) {
  if (!du_ref.du) throw InvalidArgument("reference snapshots carry no time derivative");
  if (!(u.grid == du_ref.grid) || u.n != du_ref.n || u.m != du_ref.m || std::abs(u.tau - du_ref.tau) > 1e-12 * u.tau)
    throw InvalidArgument("internal wave and reference derivative live on different grids or time lattices");
}

}  // namespace

std::vector<Mat> scattering_convolution(const Vec& weight, const SnapshotSet& u, const Mat& du) {
  if (weight.size() != u.grid.size() || du.rows() != u.u.rows() || du.cols() != u.u.cols())
    throw InvalidArgument("weight, snapshots and derivatives differ in shape");
  std::vector<std::pair<int, double>> support;
  for (Eigen::Index q = 0; q < weight.size(); ++q)
    if (weight[q] != 0.0) support.emplace_back(static_cast<int>(q), weight[q]);
  const Mat G = weighted_cross_gram(support, u.u, du, u.grid.h() * u.grid.h());
  return fold_convolution(G, u.n, u.m, u.tau);
}

Mat LambdaSet::block(int q, int j) const {
  Mat out(m, m);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s) out(r, s) = data(row(j, r, s), q);
  return out;
}

LambdaSet lambda_matrices(const SearchBasis& basis, const SnapshotSet& u_est, const SnapshotSet& du_ref) {
  check_pair(u_est, du_ref);
  if (basis.values.rows() != u_est.grid.size()) throw InvalidArgument("basis does not match the grid");
  const int n = u_est.n, m = u_est.m;
  LambdaSet out;
  out.n = n;
  out.m = m;
  out.data = Mat::Zero(static_cast<Eigen::Index>(n) * m * m, basis.size());
  const double h2 = u_est.grid.h() * u_est.grid.h();
  parallel_for(basis.size(), [&](int q) {
    std::vector<std::pair<int, double>> support;
    for (Eigen::SparseMatrix<double>::InnerIterator it(basis.values, q); it; ++it)
      if (it.value() != 0.0) support.emplace_back(static_cast<int>(it.row()), it.value());
    const Mat G = weighted_cross_gram(support, u_est.u, *du_ref.du, h2);
    const std::vector<Mat> lam = fold_convolution(G, n, m, u_est.tau);
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) out.data(out.row(j, r, s), q) = lam[j](r, s);
  });
  return out;
}

double forward_check(const Vec& rho, const SnapshotSet& u_true, const SnapshotSet& du_ref, const DataCube& cube,
                     const DataCube& cube_ref) {
  check_pair(u_true, du_ref);
  const int n = u_true.n;
  if (cube.count() < n || cube_ref.count() < n) throw InvalidArgument("cubes are shorter than the snapshot count");
  const std::vector<Mat> pred = scattering_convolution(rho, u_true, *du_ref.du);
  double peak = 0.0;
  for (int j = 0; j < n; ++j) peak = std::max(peak, (cube[j] - cube_ref[j]).cwiseAbs().maxCoeff());
  if (peak == 0.0) {
    double worst = 0.0;
    for (const Mat& p : pred) worst = std::max(worst, p.cwiseAbs().maxCoeff());
    return worst;
  }
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const Mat diff = cube[j] - cube_ref[j];
    for (Eigen::Index r = 0; r < diff.rows(); ++r)
      for (Eigen::Index s = 0; s < diff.cols(); ++s)
        if (std::abs(diff(r, s)) >= 0.01 * peak) worst = std::max(worst, std::abs(pred[j](r, s) - diff(r, s)) / peak);
  }
  return worst;
}

LeastSquares assemble_lsq(const LambdaSet& lambda, const DataCube& cube, const DataCube& cube_ref) {
  const int n = lambda.n, m = lambda.m;
  if (cube.m != m || cube_ref.m != m) throw InvalidArgument("cube sensor count does not match the Lambda matrices");
  if (cube.count() < n || cube_ref.count() < n) throw InvalidArgument("cubes are shorter than the snapshot count");
  const double w = std::sqrt(cube.tau);
  LeastSquares ls;
  ls.Gamma = w * lambda.data;
  ls.b.resize(lambda.data.rows());
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < m; ++r)
      for (int s = 0; s < m; ++s) ls.b[lambda.row(j, r, s)] = w * (cube[j](r, s) - cube_ref[j](r, s));
  return ls;
}

double relative_misfit(const DataCube& cube, const DataCube& cube_k) {
  if (cube.count() != cube_k.count() || cube.m != cube_k.m) throw InvalidArgument("cubes differ in shape");
  double num = 0.0, den = 0.0;
  for (int j = 0; j < cube.count(); ++j) {
    num += (cube[j] - cube_k[j]).squaredNorm();
    den += cube[j].squaredNorm();
  }
  if (den == 0.0) throw InvalidArgument("reference cube is identically zero");
  return std::sqrt(num / den);
}

Approach parse_approach(const std::string& name) {
  if (name == "rom1") return Approach::rom1;
  if (name == "rom2") return Approach::rom2;
  if (name == "fwi") return Approach::fwi;
  if (name == "ideal") return Approach::ideal;
  throw InvalidArgument(fmt::format("unknown approach '{}' (expected rom1, rom2, fwi or ideal)", name));
}

Regularizer parse_regularizer(const std::string& name) {
  if (name == "tikhonov") return Regularizer::tikhonov;
  if (name == "tv") return Regularizer::tv;
  throw InvalidArgument(fmt::format("unknown regularizer '{}' (expected tikhonov or tv)", name));
}

std::string to_string(Approach a) {
  switch (a) {
    case Approach::rom1: return "rom1";
    case Approach::rom2: return "rom2";
    case Approach::fwi: return "fwi";
    case Approach::ideal: return "ideal";
  }
  return "?";
}

std::string to_string(Regularizer r) { return r == Regularizer::tikhonov ? "tikhonov" : "tv"; }

double default_gamma(Regularizer r) { return r == Regularizer::tikhonov ? 0.03 : 0.01; }

void InversionConfig::validate() const {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
  if (!(stop_tol >= 0.0)) throw InvalidArgument("stop_tol must be nonnegative");
  if (!(tv_smoothing_eps > 0.0)) throw InvalidArgument("tv_smoothing_eps must be positive");
  if (!(mass_eps >= 0.0)) throw InvalidArgument("mass regularization must be nonnegative");
  if (eps_retries < 0) throw InvalidArgument("eps_retries must be nonnegative");
}

InversionState invert(const InversionConfig& config, const DataCube& cube, const InversionProblem& problem,
                      const IterationHook& hook) {
  config.validate();
  const TimeGrid& tg = problem.time;
  if (cube.m != problem.array.m() || cube.n() != tg.n)
    throw InvalidArgument(fmt::format("cube holds {} sensors and {} snapshots, problem expects {} and {}", cube.m,
                                      cube.n(), problem.array.m(), tg.n));
  if (config.approach == Approach::ideal && !problem.truth)
    throw InvalidArgument("the ideal run needs the true medium");

  const Medium& c0 = problem.initial;
  const Grid2D& grid = c0.grid();
  const SampledSignal frak = pulse_frak(problem.pulse, tg.dt, tg.t_F);
  int state_k = 0;
  // Iterates may be faster than anything the data time grid was sized for; refine dt when needed.
  auto grid_for = [&](const Medium& med) {
    const double courant = tg.dt * med.c_max() * std::sqrt(2.0) / grid.h();
    if (courant <= 1.0) return tg;
    if (courant > kMaxRefinement)
      throw StabilityError(fmt::format("iterate {} reaches speed {:.4g}, {:.0f}x beyond the data time step; "
                                       "the update ran away (try a larger gamma)",
                                       state_k, med.c_max(), courant));
    return make_time_grid(tg.tau, tg.n, cfl_dt(grid.h(), med.c_max()), tg.t_F);
  };
  auto data_at = [&](const Medium& med) {
    return make_data_cube(med, problem.array, problem.pulse, grid_for(med), problem.boundaries);
  };
  auto waves_at = [&](const Medium& med, bool deriv) {
    const TimeGrid g = grid_for(med);
    if (g.dt == tg.dt) return make_snapshots(med, problem.array, frak, tg, deriv, problem.boundaries);
    return make_snapshots(med, problem.array, pulse_frak(problem.pulse, g.dt, g.t_F), g, deriv, problem.boundaries);
  };

  const bool uses_rom = config.approach == Approach::rom1 || config.approach == Approach::rom2;
  InversionState state{Vec::Zero(problem.basis.size()), c0, 0, {}, {}, {}, config.mass_eps};
  BlockMatrix R_data;
  if (uses_rom) {
    MassFactor mf = factor_mass(assemble_mass(cube, tg.n), config.mass_eps, config.eps_retries);
    R_data = std::move(mf.R);
    state.mass_eps = mf.eps;
  }
  std::optional<SnapshotSet> u_true;
  if (config.approach == Approach::ideal) u_true = waves_at(*problem.truth, false);

  DataCube cube_k = data_at(c0);
  const DataCube cube_0 = cube_k;
  state.misfit_history.push_back(relative_misfit(cube, cube_k));
  std::optional<SnapshotSet> waves_0;

  for (int k = 1; k <= config.max_iters; ++k) {
    const Medium c_prev = state.c_k;
    state_k = k;
    SnapshotSet waves = waves_at(c_prev, true);
    if (k == 1) waves_0 = waves;

    SnapshotSet internal = [&] {
      switch (config.approach) {
        case Approach::rom1:
        case Approach::rom2: {
          const ReferenceBasis basis = build_reference_basis(waves, state.mass_eps, config.eps_retries);
          return estimate_internal(basis, R_data);
        }
        case Approach::fwi: return waves;
        case Approach::ideal: return *u_true;
      }
      return waves;
    }();
    // Approach 1 keeps the linearization at c_0; the others move it to c_{k-1}.
    const bool anchored = config.approach == Approach::rom1;
    const SnapshotSet& du_ref = anchored ? *waves_0 : waves;
    const DataCube& cube_ref = anchored ? cube_0 : cube_k;
    const Medium& base = anchored ? c0 : c_prev;

    const LeastSquares ls = assemble_lsq(lambda_matrices(problem.basis, internal, du_ref), cube, cube_ref);
    Vec eta;
    if (config.reg == Regularizer::tikhonov) {
      eta = tikhonov_step(ls.Gamma, ls.b, config.gamma);
    } else {
      const Vec eta_lin = anchored ? state.eta : Vec::Zero(problem.basis.size());
      const Vec rhs = anchored ? Vec(ls.b - ls.Gamma * eta_lin) : ls.b;
      eta = eta_lin + tv_step(ls.Gamma, rhs, eta_lin, problem.basis, base.c(), grid, c0.omega_in(), config.gamma,
                              config.tv_smoothing_eps);
    }

    state.eta = eta;
    state.c_k = base.with_speed(speed_of_rho(problem.basis.field(eta), base.c()));
    state.k = k;
    cube_k = data_at(state.c_k);
    state.misfit_history.push_back(relative_misfit(cube, cube_k));
    state.eta_history.push_back(eta);
    state.speed_history.push_back(state.c_k.c());
    if (hook) hook(state);

    const double before = state.misfit_history[k - 1];
    const double after = state.misfit_history[k];
    const double change = before > 0.0 ? std::abs(before - after) / before : 0.0;
    if (change < config.stop_tol) break;
  }
  return state;
}

}  // namespace rwi
