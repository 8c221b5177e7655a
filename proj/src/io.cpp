#include "rwi/io.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace rwi::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'R', 'W', 'I', 'V'};
constexpr std::size_t kHeaderBytes = 32;

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

std::string encode_header(const Header& h) {
  std::string out(kMagic, 4);
  put(out, static_cast<std::uint32_t>(h.kind));
  put(out, h.nx);
  put(out, h.nz);
  put(out, h.h);
  put(out, h.count);
  return out;
}

Header decode_header(const std::string& bytes, const std::filesystem::path& path) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw IoError(fmt::format("{}: not an RWIV file", path.string()));
  Header h;
  h.kind = static_cast<RecordKind>(get<std::uint32_t>(bytes, 4));
  h.nx = get<std::uint32_t>(bytes, 8);
  h.nz = get<std::uint32_t>(bytes, 12);
  h.h = get<double>(bytes, 16);
  h.count = get<std::uint64_t>(bytes, 24);
  return h;
}

void check_payload(const std::string& bytes, std::size_t doubles, const std::filesystem::path& path) {
  if (bytes.size() != kHeaderBytes + doubles * sizeof(double))
    throw IoError(fmt::format("{}: payload is {} bytes, header implies {}", path.string(), bytes.size() - kHeaderBytes,
                              doubles * sizeof(double)));
}

double payload(const std::string& bytes, std::size_t index) {
  return get<double>(bytes, kHeaderBytes + index * sizeof(double));
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError(fmt::format("cannot open {} for writing", tmp.string()));
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError(fmt::format("write to {} failed", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(fmt::format("cannot rename into {}", path.string()));
  }
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_fields(const std::filesystem::path& path, const Grid2D& grid, const std::vector<Vec>& fields) {
  Header h{RecordKind::field, static_cast<std::uint32_t>(grid.nx()), static_cast<std::uint32_t>(grid.nz()), grid.h(),
           fields.size()};
  std::string out = encode_header(h);
  out.reserve(kHeaderBytes + fields.size() * grid.size() * sizeof(double));
  for (const Vec& f : fields) {
    if (f.size() != grid.size()) throw InvalidArgument("field size does not match grid");
    for (Eigen::Index q = 0; q < f.size(); ++q) put(out, f[q]);
  }
  write_atomic(path, out);
}

void write_field(const std::filesystem::path& path, const Grid2D& grid, const Vec& field) {
  write_fields(path, grid, {field});
}

std::vector<Vec> read_fields(const std::filesystem::path& path, Header* header) {
  const std::string bytes = read_all(path);
  const Header h = decode_header(bytes, path);
  if (h.kind != RecordKind::field) throw IoError(fmt::format("{}: not a field file", path.string()));
  const std::size_t size = static_cast<std::size_t>(h.nx) * h.nz;
  check_payload(bytes, size * h.count, path);
  std::vector<Vec> out(h.count, Vec(size));
  for (std::size_t c = 0; c < h.count; ++c)
    for (std::size_t q = 0; q < size; ++q) out[c][q] = payload(bytes, c * size + q);
  if (header) *header = h;
  return out;
}

void write_cube(const std::filesystem::path& path, const DataCube& cube) {
  const auto m = static_cast<std::uint32_t>(cube.m);
  std::string out = encode_header({RecordKind::cube, m, m, cube.tau, cube.D.size()});
  for (const Mat& D : cube.D) {
    for (Eigen::Index r = 0; r < D.rows(); ++r)
      for (Eigen::Index c = 0; c < D.cols(); ++c) put(out, D(r, c));
  }
  write_atomic(path, out);
}

DataCube read_cube(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  const Header h = decode_header(bytes, path);
  if (h.kind != RecordKind::cube || h.nx != h.nz) throw IoError(fmt::format("{}: not a data cube", path.string()));
  const std::size_t m = h.nx;
  check_payload(bytes, m * m * h.count, path);
  DataCube cube;
  cube.m = static_cast<int>(m);
  cube.tau = h.h;
  cube.D.assign(h.count, Mat(m, m));
  std::size_t idx = 0;
  for (Mat& D : cube.D)
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) D(r, c) = payload(bytes, idx++);
  return cube;
}

void write_block_matrix(const std::filesystem::path& path, const BlockMatrix& M) {
  std::string out = encode_header({RecordKind::block_matrix, static_cast<std::uint32_t>(M.nblocks()),
                                   static_cast<std::uint32_t>(M.block_size()), 0.0, 1});
  const Mat& d = M.data();
  for (Eigen::Index r = 0; r < d.rows(); ++r)
    for (Eigen::Index c = 0; c < d.cols(); ++c) put(out, d(r, c));
  write_atomic(path, out);
}

BlockMatrix read_block_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  const Header h = decode_header(bytes, path);
  if (h.kind != RecordKind::block_matrix) throw IoError(fmt::format("{}: not a block matrix", path.string()));
  const std::size_t dim = static_cast<std::size_t>(h.nx) * h.nz;
  check_payload(bytes, dim * dim, path);
  Mat d(dim, dim);
  std::size_t idx = 0;
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) d(r, c) = payload(bytes, idx++);
  return BlockMatrix(static_cast<int>(h.nx), static_cast<int>(h.nz), std::move(d));
}

void write_misfit_csv(const std::filesystem::path& path, const std::vector<double>& misfit) {
  std::string out = "iter,misfit\n";
  for (std::size_t k = 0; k < misfit.size(); ++k) out += fmt::format("{},{:.17g}\n", k, misfit[k]);
  write_atomic(path, out);
}

void write_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
  std::string out = fmt::format("{}\n", fmt::join(columns, ","));
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += fmt::format("{:.17g}", row[c]);
    }
    out += '\n';
  }
  write_atomic(path, out);
}

}  // namespace rwi::io
