#include "hwdmd/matrix_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hwdmd/error.hpp"

namespace hwdmd::matrix_io {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), sizeof(T))) throw DataError("truncated matrix data");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

void write_binary(std::ostream& out, const Matrix& m) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw IoError("matrix too large for the binary format");
  }
  out.write(kMagic, sizeof kMagic);
  put_le(out, static_cast<std::uint32_t>(m.rows()));
  put_le(out, static_cast<std::uint32_t>(m.cols()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
  } else {
    for (Index i = 0; i < m.size(); ++i) put_le(out, m.data()[i]);
  }
  if (!out) throw IoError("failed writing matrix");
}

Matrix read_binary(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError("not a binary matrix (bad magic)");
  }
  const auto rows = get_le<std::uint32_t>(in);
  const auto cols = get_le<std::uint32_t>(in);
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  if constexpr (std::endian::native == std::endian::little) {
    const auto bytes = static_cast<std::streamsize>(m.size() * sizeof(double));
    if (!in.read(reinterpret_cast<char*>(m.data()), bytes)) throw DataError("truncated matrix data");
  } else {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = get_le<double>(in);
  }
  return m;
}

void write_text(std::ostream& out, const Matrix& m) {
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out.put(',');
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf;
    }
    out.put('\n');
  }
  if (!out) throw IoError("failed writing matrix");
}

Matrix read_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw DataError("invalid number '" + cell + "' in matrix CSV");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError("ragged rows in matrix CSV");
    }
    rows.push_back(std::move(row));
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = r ? static_cast<Index>(rows.front().size()) : 0;
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

void save(const std::filesystem::path& path, const Matrix& m, Format format) {
  std::ostringstream out(std::ios::binary);
  if (format == Format::binary) {
    write_binary(out, m);
  } else {
    write_text(out, m);
  }
  write_file_atomic(path, out.str());
}

Matrix load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[sizeof kMagic] = {};
  in.read(magic, sizeof magic);
  const bool binary = in.gcount() == sizeof magic && std::memcmp(magic, kMagic, sizeof kMagic) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_binary(in) : read_text(in);
}

}  // namespace hwdmd::matrix_io
