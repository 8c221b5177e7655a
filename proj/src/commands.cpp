#include "rwi/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <tuple>

#include "rwi/internal_wave.hpp"
#include "rwi/io.hpp"
#include "rwi/rom.hpp"

namespace rwi {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory {}: {}", dir.string(), ec.message()));
}

DataCube check_cube(DataCube cube, const Scenario& s, const fs::path& path) {
  if (cube.m != s.m || cube.n() != s.n || std::abs(cube.tau - s.tau) > 1e-12 * s.tau)
    throw InvalidArgument(fmt::format("{} holds m={}, n={}, tau={} but the scenario expects m={}, n={}, tau={}",
                                      path.string(), cube.m, cube.n(), cube.tau, s.m, s.n, s.tau));
  return cube;
}

}  // namespace

void cmd_synthesize(const Scenario& scenario, const fs::path& out_dir, std::ostream& log) {
  scenario.validate();
  ensure_dir(out_dir);
  const Medium truth = scenario.true_medium();
  const SensorArray array = scenario.array();
  const TimeGrid tg = scenario.time_grid();
  fmt::print(log, "grid {}x{} h={:.4g}, dt={:.4g} ({} steps per tau), m={}, n={}\n", truth.grid().nx(),
             truth.grid().nz(), truth.grid().h(), tg.dt, tg.steps_per_tau, array.m(), tg.n);
  const DataCube clean = make_data_cube(truth, array, scenario.pulse, tg, scenario.boundaries);
  const DataCube measured =
      scenario.noise_level > 0.0 ? add_noise(clean, scenario.noise_level, scenario.noise_seed) : clean;
  io::write_atomic(out_dir / "manifest.json", scenario_to_json(scenario));
  io::write_cube(out_dir / "cube_clean.rwi", clean);
  io::write_cube(out_dir / "cube.rwi", measured);
  io::write_field(out_dir / "truth.rwi", truth.grid(), truth.c());
  fmt::print(log, "wrote {} (noise level {})\n", out_dir.string(), scenario.noise_level);
}

InversionState cmd_invert(const Scenario& scenario, const fs::path& cube_dir, const fs::path& out_dir,
                          const InvertOptions& options, std::ostream& log) {
  Scenario s = scenario;
  if (options.approach) s.approach = *options.approach;
  if (options.reg) s.regularizer = *options.reg;
  if (options.gamma) (s.regularizer == Regularizer::tikhonov ? s.gamma_tikhonov : s.gamma_tv) = *options.gamma;
  if (options.basis) s.basis = *options.basis;
  if (options.iters) s.max_iters = *options.iters;
  s.validate();

  DataCube cube;
  if (options.seed) {
    const fs::path path = cube_dir / "cube_clean.rwi";
    cube = check_cube(io::read_cube(path), s, path);
    if (s.noise_level > 0.0) cube = add_noise(cube, s.noise_level, *options.seed);
  } else {
    const fs::path path = cube_dir / "cube.rwi";
    cube = check_cube(io::read_cube(path), s, path);
  }

  const InversionConfig cfg = s.inversion_config();
  InversionProblem problem = s.problem();
  if (cfg.approach != Approach::ideal) problem.truth.reset();
  fmt::print(log, "{} / {} with gamma={}, basis {} ({} functions)\n", to_string(cfg.approach), to_string(cfg.reg),
             cfg.gamma, to_string(s.basis), problem.basis.size());

  ensure_dir(out_dir);
  const InversionState state = invert(cfg, cube, problem, [&](const InversionState& st) {
    fmt::print(log, "iter {:2d}  misfit {:.6e}\n", st.k, st.misfit_history.back());
  });

  io::write_misfit_csv(out_dir / "misfit.csv", state.misfit_history);
  std::vector<std::string> cols;
  for (int q = 0; q < problem.basis.size(); ++q) cols.push_back(fmt::format("eta_{}", q));
  std::vector<std::vector<double>> rows;
  for (const Vec& e : state.eta_history) rows.emplace_back(e.data(), e.data() + e.size());
  io::write_matrix_csv(out_dir / "eta.csv", cols, rows);
  io::write_fields(out_dir / "speeds.rwi", state.c_k.grid(), state.speed_history);

  nlohmann::json run = nlohmann::json::parse(scenario_to_json(s));
  run["result"] = {{"iterations", state.k},
                   {"mass_eps", state.mass_eps},
                   {"gamma", cfg.gamma},
                   {"initial_misfit", state.misfit_history.front()},
                   {"final_misfit", state.misfit_history.back()}};
  io::write_atomic(out_dir / "run.json", run.dump(2) + "\n");
  fmt::print(log, "final misfit {:.6e} after {} iterations (mass eps {})\n", state.misfit_history.back(), state.k,
             state.mass_eps);
  return state;
}

namespace {

double rel(const Mat& a, const Mat& b) {
  const double d = b.norm();
  return d > 0.0 ? (a - b).norm() / d : (a - b).norm();
}

Mat random_spd(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  Mat A(dim, dim);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  Mat S = A * A.transpose() / dim;
  S.diagonal().array() += 0.5;
  return S;
}

// Data shared between checks, built on first use.
struct VerifyContext {
  const Scenario& s;
  Medium truth;
  Medium background;
  SensorArray array;
  TimeGrid tg;
  std::optional<DataCube> cube, cube_ref;
  std::optional<SnapshotSet> u_true, u_ref;
  std::optional<RomModel> rom;

  explicit VerifyContext(const Scenario& sc)
      : s(sc), truth(sc.true_medium()), background(sc.background()), array(sc.array()), tg(sc.time_grid()) {}

  SampledSignal frak() const { return pulse_frak(s.pulse, tg.dt, tg.t_F); }
  const DataCube& data() {
    if (!cube) cube = make_data_cube(truth, array, s.pulse, tg, s.boundaries);
    return *cube;
  }
  const DataCube& data_ref() {
    if (!cube_ref) cube_ref = make_data_cube(background, array, s.pulse, tg, s.boundaries);
    return *cube_ref;
  }
  const SnapshotSet& true_waves() {
    if (!u_true) u_true = make_snapshots(truth, array, frak(), tg, false, s.boundaries);
    return *u_true;
  }
  const SnapshotSet& ref_waves() {
    if (!u_ref) u_ref = make_snapshots(background, array, frak(), tg, true, s.boundaries);
    return *u_ref;
  }
  // Exact mode: no mass regularization.
  const RomModel& exact_rom() {
    if (!rom) rom = build_rom(data(), 0.0, 0);
    return *rom;
  }
};

using Check = std::function<CheckResult(VerifyContext&)>;

CheckResult check_cosine(VerifyContext&) {
  std::mt19937_64 rng(11);
  const Mat A = random_spd(rng, 8);
  const double tau = 0.3;
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  const Vec cos1 = (tau * es.eigenvalues().array().sqrt()).cos().matrix();
  const Mat P = es.eigenvectors() * cos1.asDiagonal() * es.eigenvectors().transpose();
  Mat u0(8, 1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 8; ++i) u0(i, 0) = g(rng);
  const std::vector<Mat> seq = cosine_recursion(P, u0, 50);
  double worst = 0.0;
  for (int j = 0; j <= 50; ++j) {
    const Vec cj = (j * tau * es.eigenvalues().array().sqrt()).cos().matrix();
    const Mat exact = es.eigenvectors() * cj.asDiagonal() * es.eigenvectors().transpose() * u0;
    worst = std::max(worst, rel(seq[j], exact));
  }
  return {"cosine_recursion", worst <= 1e-12, fmt::format("max relative error {:.2e} (limit 1e-12)", worst)};
}

CheckResult check_mass_structure(VerifyContext&) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  DataCube cube{3, 0.1, {}};
  for (int j = 0; j < 12; ++j) {
    Mat D(3, 3);
    for (Eigen::Index i = 0; i < D.size(); ++i) D.data()[i] = g(rng);
    cube.D.push_back(D);
  }
  const BlockMatrix M = assemble_mass(cube), S = assemble_stiffness(cube);
  bool exact = true;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const Mat m_ij = 0.5 * (cube[i + j] + cube[std::abs(i - j)]);
      const Mat s_ij =
          0.25 * (cube[i + j + 1] + cube[std::abs(i - j - 1)] + cube[std::abs(i + j - 1)] + cube[std::abs(i - j + 1)]);
      exact = exact && M.block(i, j) == m_ij && S.block(i, j) == s_ij;
    }
  }
  return {"mass_structure", exact, exact ? "Hankel plus Toeplitz blocks match exactly" : "block mismatch"};
}

CheckResult check_cholesky(VerifyContext&) {
  std::mt19937_64 rng(13);
  const int n = 20, m = 20;
  const BlockMatrix M(n, m, random_spd(rng, n * m), BlockStructure::symmetric);
  const BlockMatrix R = block_cholesky(M);
  const double err = rel(R.data().transpose() * R.data(), M.data());
  Mat bad = M.data();
  bad(5 * m, 5 * m) = -1.0;
  bool raised = false;
  try {
    block_cholesky(BlockMatrix(n, m, bad));
  } catch (const NotPositiveDefinite&) {
    raised = true;
  }
  return {"block_cholesky", err <= 1e-10 && raised,
          fmt::format("reconstruction {:.2e} (limit 1e-10), indefinite input {}", err, raised ? "rejected" : "accepted")};
}

CheckResult check_reciprocity(VerifyContext& ctx) {
  double worst = 0.0;
  const DataCube& cube = ctx.data();
  for (int j = 0; j < cube.count(); ++j) worst = std::max(worst, (cube[j] - cube[j].transpose()).norm() / cube[0].norm());
  return {"reciprocity", worst <= 1e-6, fmt::format("max asymmetry {:.2e} relative to D_0 (limit 1e-6)", worst)};
}

CheckResult check_energy(VerifyContext& ctx) {
  const SampledSignal source = source_from_pulse(sample_pulse_f(ctx.s.pulse, ctx.tg.dt, ctx.tg.t_F));
  const long k0 = ctx.tg.support_steps() + 10;
  RecordSpec rec;
  rec.field_steps = {k0, k0 + 1, k0 + 1000, k0 + 1001};
  const FdtdResult r = fdtd_run(ctx.truth, ctx.array, 0, source, ctx.s.boundaries, ctx.tg, rec);
  const double e0 = discrete_energy(ctx.truth, ctx.s.boundaries, ctx.tg.dt, r.fields[0], r.fields[1]);
  const double e1 = discrete_energy(ctx.truth, ctx.s.boundaries, ctx.tg.dt, r.fields[2], r.fields[3]);
  const double drift = std::abs(e1 - e0) / std::abs(e0);
  return {"energy", drift <= 1e-6, fmt::format("drift over 1000 steps {:.2e} (limit 1e-6)", drift)};
}

CheckResult check_rom_exactness(VerifyContext& ctx) {
  const RomModel& rom = ctx.exact_rom();
  const int n = ctx.s.n, m = ctx.s.m;
  const std::vector<Mat> steps = rom_step(rom.P, rom.R, n - 1);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) worst = std::max(worst, rel(steps[j], rom.R.data().middleCols(j * m, m)));
  return {"rom_exactness", worst <= 1e-8, fmt::format("max relative error {:.2e} (limit 1e-8)", worst)};
}

CheckResult check_datafit(VerifyContext& ctx) {
  const RomModel& rom = ctx.exact_rom();
  const ReferenceBasis basis = build_reference_basis(ctx.ref_waves(), 0.0, 0);
  const DatafitReport est = check_datafit(estimate_internal(basis, rom.R), ctx.data());
  const DatafitReport ref = check_datafit(ctx.ref_waves(), ctx.data());
  const bool ok = est.max() <= 1e-8 && est.max_first < ref.max_first && est.max_second < ref.max_second;
  return {"datafit", ok,
          fmt::format("estimate {:.2e}/{:.2e}, reference wave {:.2e}/{:.2e} (limit 1e-8)", est.max_first,
                      est.max_second, ref.max_first, ref.max_second)};
}

CheckResult check_datafit_alarm(VerifyContext& ctx) {
  const RomModel& rom = ctx.exact_rom();
  const ReferenceBasis basis = build_reference_basis(ctx.ref_waves(), 0.0, 0);
  Mat perturbed = rom.R.data();
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  Mat noise(perturbed.rows(), perturbed.cols());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = g(rng);
  noise = noise.triangularView<Eigen::Upper>();
  perturbed += 0.01 * perturbed.norm() / noise.norm() * noise;
  const BlockMatrix R(rom.R.nblocks(), rom.R.block_size(), perturbed, BlockStructure::block_upper_triangular);
  const DatafitReport rep = check_datafit(estimate_internal(basis, R), ctx.data());
  return {"datafit_alarm", rep.max() > 1e-4,
          fmt::format("1% perturbation of R gives residual {:.2e} (alarm above 1e-4)", rep.max())};
}

CheckResult check_forward(VerifyContext& ctx) {
  const Vec rho = rho_of_speeds(ctx.truth.c(), ctx.background.c());
  const double err = forward_check(rho, ctx.true_waves(), ctx.ref_waves(), ctx.data(), ctx.data_ref());
  return {"forward_relation", err <= 0.1, fmt::format("max mismatch {:.3e} of the peak (limit 0.1)", err)};
}

CheckResult check_rho_roundtrip(VerifyContext& ctx) {
  const Vec c = ctx.truth.c(), c_ref = ctx.background.c();
  const Vec back = speed_of_rho(rho_of_speeds(c, c_ref), c_ref);
  const double worst = ((back - c).array().abs() / c.array()).maxCoeff();
  return {"rho_roundtrip", worst <= 1e-14, fmt::format("max pointwise error {:.2e} (limit 1e-14)", worst)};
}

CheckResult check_fixed_point(VerifyContext& ctx) {
  InversionConfig cfg = ctx.s.inversion_config();
  cfg.max_iters = 1;
  const InversionProblem problem{ctx.background, ctx.array, ctx.s.pulse, ctx.tg, ctx.s.boundaries,
                                 ctx.s.search_basis(), std::nullopt};
  const InversionState st = invert(cfg, ctx.data_ref(), problem);
  const bool same = st.c_k.c() == ctx.background.c();
  return {"fixed_point", same,
          same ? "data of c_0 give c_1 = c_0 exactly"
               : fmt::format("c_1 moved by {:.2e}", (st.c_k.c() - ctx.background.c()).cwiseAbs().maxCoeff())};
}

const std::vector<std::tuple<std::string, std::string, Check>>& registry() {
  static const std::vector<std::tuple<std::string, std::string, Check>> checks = {
      {"cosine_recursion", "three-term recursion against eigendecomposition on an 8x8 SPD oracle", check_cosine},
      {"mass_structure", "mass and stiffness blocks equal their Hankel plus Toeplitz formulas", check_mass_structure},
      {"block_cholesky", "R^T R reproduces a 400x400 SPD block matrix; indefinite input is rejected", check_cholesky},
      {"reciprocity", "synthesized data matrices are symmetric", check_reciprocity},
      {"energy", "discrete energy is conserved once the source is off", check_energy},
      {"rom_exactness", "ROM time stepping reproduces the block columns of R", check_rom_exactness},
      {"datafit", "estimated internal wave fits the data better than the reference wave", check_datafit},
      {"datafit_alarm", "a 1% perturbation of R trips the data-fit residual", check_datafit_alarm},
      {"forward_relation", "D - D_ref matches the scattering integral with the true internal wave", check_forward},
      {"rho_roundtrip", "speed to rho to speed round trip", check_rho_roundtrip},
      {"fixed_point", "data synthesized at c_0 leave c_0 unchanged", check_fixed_point},
  };
  return checks;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> verify_checks() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, desc, fn] : registry()) out.emplace_back(name, desc);
  return out;
}

std::vector<CheckResult> cmd_verify(const Scenario& scenario, std::ostream& log) {
  scenario.validate();
  VerifyContext ctx(scenario);
  std::vector<CheckResult> results;
  for (const auto& [name, desc, fn] : registry()) {
    CheckResult r;
    try {
      r = fn(ctx);
    } catch (const Error& e) {
      r = {name, false, fmt::format("raised: {}", e.what())};
    }
    fmt::print(log, "{} {:<18} {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
    results.push_back(std::move(r));
  }
  return results;
}

double BenchResult::final_misfit(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return histories[i].back();
  throw InvalidArgument(fmt::format("no run named '{}'", name));
}

bool BenchResult::ordering_holds(double slack) const {
  const double ideal = final_misfit("ideal"), rom2 = final_misfit("rom2");
  return ideal <= rom2 && rom2 <= slack * final_misfit("rom1") && rom2 <= slack * final_misfit("fwi");
}

BenchResult cmd_bench(const Scenario& scenario, const fs::path& out_dir, std::ostream& log) {
  scenario.validate();
  ensure_dir(out_dir);
  InversionProblem problem = scenario.problem();
  const DataCube clean = make_data_cube(*problem.truth, problem.array, problem.pulse, problem.time, problem.boundaries);
  const DataCube cube =
      scenario.noise_level > 0.0 ? add_noise(clean, scenario.noise_level, scenario.noise_seed) : clean;

  BenchResult out;
  for (Approach a : {Approach::rom1, Approach::rom2, Approach::fwi, Approach::ideal}) {
    InversionConfig cfg = scenario.inversion_config();
    cfg.approach = a;
    const InversionState st = invert(cfg, cube, problem);
    fmt::print(log, "{:<6} final misfit {:.6e} after {} iterations\n", to_string(a), st.misfit_history.back(), st.k);
    out.names.push_back(to_string(a));
    out.histories.push_back(st.misfit_history);
  }

  std::size_t rows = 0;
  for (const auto& h : out.histories) rows = std::max(rows, h.size());
  std::string csv = "iter";
  for (const auto& n : out.names) csv += "," + n;
  csv += "\n";
  std::string table = fmt::format("{:>4}", "iter");
  for (const auto& n : out.names) table += fmt::format(" {:>12}", n);
  table += "\n";
  for (std::size_t k = 0; k < rows; ++k) {
    csv += std::to_string(k);
    table += fmt::format("{:>4}", k);
    for (const auto& h : out.histories) {
      csv += k < h.size() ? fmt::format(",{:.17g}", h[k]) : std::string(",");
      table += k < h.size() ? fmt::format(" {:>12.6e}", h[k]) : fmt::format(" {:>12}", "-");
    }
    csv += "\n";
    table += "\n";
  }
  io::write_atomic(out_dir / "bench_misfit.csv", csv);
  fmt::print(log, "{}", table);
  fmt::print(log, "ordering ideal <= rom2 <= 1.05 min(rom1, fwi): {}\n", out.ordering_holds() ? "holds" : "violated");
  return out;
}

}  // namespace rwi
