#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "rwi/commands.hpp"
#include "rwi/errors.hpp"
#include "rwi/scenario.hpp"

namespace {

int exit_code(rwi::ErrorKind kind) {
  switch (kind) {
    case rwi::ErrorKind::validation: return 2;
    case rwi::ErrorKind::numerical: return 3;
    case rwi::ErrorKind::io: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic waveform inversion with a data-driven internal wave"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, cube_dir;

  auto* synth = app.add_subcommand("synthesize", "simulate the array data of a scenario");
  synth->add_option("scenario", scenario_path, "scenario JSON file")->required();
  synth->add_option("out", out_dir, "output directory")->required();

  std::string approach, reg, basis;
  double gamma = 0.0;
  int iters = 0;
  std::uint64_t seed = 0;
  auto* inv = app.add_subcommand("invert", "run one inversion on a synthesized cube");
  inv->add_option("scenario", scenario_path, "scenario JSON file")->required();
  inv->add_option("cube_dir", cube_dir, "directory written by synthesize")->required();
  inv->add_option("out", out_dir, "output directory")->required();
  auto* o_approach =
      inv->add_option("--approach", approach, "rom1, rom2 or fwi")->check(CLI::IsMember({"rom1", "rom2", "fwi"}));
  auto* o_reg = inv->add_option("--reg", reg, "tikhonov or tv")->check(CLI::IsMember({"tikhonov", "tv"}));
  auto* o_gamma = inv->add_option("--gamma", gamma, "regularization weight (default per regularizer)");
  auto* o_basis =
      inv->add_option("--basis", basis, "hat, gaussian or pixel")->check(CLI::IsMember({"hat", "gaussian", "pixel"}));
  auto* o_iters = inv->add_option("--iters", iters, "maximum number of iterations")->check(CLI::PositiveNumber);
  auto* o_seed = inv->add_option("--seed", seed, "redraw the scenario noise on the clean cube with this seed");

  bool list_only = false;
  auto* ver = app.add_subcommand("verify", "run the invariant checks on a scenario");
  ver->add_option("scenario", scenario_path, "scenario JSON file");
  ver->add_flag("--list", list_only, "list the checks and exit");

  auto* bench = app.add_subcommand("bench", "compare rom1, rom2, fwi and the true-internal-wave run");
  bench->add_option("scenario", scenario_path, "scenario JSON file")->required();
  bench->add_option("out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ver && list_only) {
      for (const auto& [name, desc] : rwi::verify_checks()) fmt::print("{:<18} {}\n", name, desc);
      return 0;
    }
    if (*ver && scenario_path.empty()) {
      fmt::print(stderr, "verify: a scenario file is required unless --list is given\n");
      return 2;
    }
    const rwi::Scenario scenario = rwi::load_scenario(scenario_path);
    if (*synth) {
      rwi::cmd_synthesize(scenario, out_dir, std::cout);
    } else if (*inv) {
      rwi::InvertOptions opts;
      if (*o_approach) opts.approach = rwi::parse_approach(approach);
      if (*o_reg) opts.reg = rwi::parse_regularizer(reg);
      if (*o_gamma) opts.gamma = gamma;
      if (*o_basis) opts.basis = rwi::parse_basis_kind(basis);
      if (*o_iters) opts.iters = iters;
      if (*o_seed) opts.seed = seed;
      rwi::cmd_invert(scenario, cube_dir, out_dir, opts, std::cout);
    } else if (*ver) {
      int failed = 0;
      for (const auto& r : rwi::cmd_verify(scenario, std::cout)) failed += r.passed ? 0 : 1;
      if (failed > 0) {
        fmt::print(stderr, "{} check(s) failed\n", failed);
        return 3;
      }
    } else if (*bench) {
      const rwi::BenchResult r = rwi::cmd_bench(scenario, out_dir, std::cout);
      if (!r.ordering_holds()) return 3;
    }
  } catch (const rwi::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 0;
}
