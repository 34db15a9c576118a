#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hwdmd/types.hpp"

/// Dense matrix files.
///
/// Binary layout (little-endian): 8-byte magic "HWDMDMAT", uint32 rows,
/// uint32 cols, then rows*cols float64 values in column-major order. The text
/// form is CSV with one matrix row per line and no header.
namespace hwdmd::matrix_io {

inline constexpr char kMagic[8] = {'H', 'W', 'D', 'M', 'D', 'M', 'A', 'T'};
inline constexpr std::size_t kHeaderBytes = 16;

enum class Format { binary, text };

void write_binary(std::ostream& out, const Matrix& m);
Matrix read_binary(std::istream& in);

void write_text(std::ostream& out, const Matrix& m);
Matrix read_text(std::istream& in);

/// Atomic: writes a sibling temp file and renames it over `path`.
void save(const std::filesystem::path& path, const Matrix& m, Format format);
/// Detects the format from the magic bytes.
Matrix load(const std::filesystem::path& path);

/// Writes `bytes` to `path` through a temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace hwdmd::matrix_io
