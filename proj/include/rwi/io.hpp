#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rwi/core.hpp"
#include "rwi/wave_sim.hpp"

namespace rwi::io {

/// Binary layout: 32-byte header then little-endian f64 payload, row-major.
///   magic "RWIV" | u32 kind | u32 nx | u32 nz | f64 h | u64 count
/// kind 0: field grid (nx, nz, h = spacing, count = number of stacked fields)
/// kind 1: data cube  (nx = nz = m, h = tau, count = number of m x m matrices)
/// kind 2: block matrix (nx = n blocks, nz = m block size, h = 0, count = 1)
enum class RecordKind : std::uint32_t { field = 0, cube = 1, block_matrix = 2 };

struct Header {
  RecordKind kind = RecordKind::field;
  std::uint32_t nx = 0;
  std::uint32_t nz = 0;
  double h = 0.0;
  std::uint64_t count = 0;
};

/// Writes `bytes` to `path` through a temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_all(const std::filesystem::path& path);

void write_fields(const std::filesystem::path& path, const Grid2D& grid, const std::vector<Vec>& fields);
void write_field(const std::filesystem::path& path, const Grid2D& grid, const Vec& field);
/// Returns the stored fields; `header` receives the dimensions.
std::vector<Vec> read_fields(const std::filesystem::path& path, Header* header = nullptr);

void write_cube(const std::filesystem::path& path, const DataCube& cube);
DataCube read_cube(const std::filesystem::path& path);

void write_block_matrix(const std::filesystem::path& path, const BlockMatrix& M);
BlockMatrix read_block_matrix(const std::filesystem::path& path);

/// Two-column CSV "iter,misfit".
void write_misfit_csv(const std::filesystem::path& path, const std::vector<double>& misfit);
/// One row per iteration, one column per coefficient.
void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows);

}  // namespace rwi::io
