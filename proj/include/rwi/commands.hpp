#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rwi/inversion.hpp"
#include "rwi/scenario.hpp"

namespace rwi {

/// Writes manifest.json, cube.rwi (with the scenario's noise), cube_clean.rwi and truth.rwi.
void cmd_synthesize(const Scenario& scenario, const std::filesystem::path& out_dir, std::ostream& log);

struct InvertOptions {
  std::optional<Approach> approach;
  std::optional<Regularizer> reg;
  std::optional<double> gamma;
  std::optional<BasisKind> basis;
  std::optional<int> iters;
  /// Re-draws the scenario's noise on cube_clean.rwi with this seed instead of reading cube.rwi.
  std::optional<std::uint64_t> seed;
};

/// Reads a synthesized cube and writes misfit.csv, eta.csv, speeds.rwi (c_1 .. c_k) and run.json.
InversionState cmd_invert(const Scenario& scenario, const std::filesystem::path& cube_dir,
                          const std::filesystem::path& out_dir, const InvertOptions& options, std::ostream& log);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Names and one-line descriptions of the verification checks, in run order.
std::vector<std::pair<std::string, std::string>> verify_checks();

/// Runs every check on the scenario's geometry and prints one line per check.
std::vector<CheckResult> cmd_verify(const Scenario& scenario, std::ostream& log);

struct BenchResult {
  std::vector<std::string> names;              // rom1, rom2, fwi, ideal
  std::vector<std::vector<double>> histories;  // misfit histories in the same order
  double final_misfit(const std::string& name) const;
  /// ideal <= rom2 <= slack * rom1 and ideal <= rom2 <= slack * fwi on the final misfits.
  bool ordering_holds(double slack = 1.05) const;
};

/// Runs the three approaches plus the true-internal-wave run on the scenario's measured cube and
/// writes bench_misfit.csv (one column per run) into out_dir.
BenchResult cmd_bench(const Scenario& scenario, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace rwi
