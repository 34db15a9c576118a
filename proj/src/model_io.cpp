#include "hwdmd/model_io.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hwdmd/calendar.hpp"
#include "hwdmd/error.hpp"
#include "hwdmd/matrix_io.hpp"

namespace hwdmd {

using nlohmann::json;

namespace {

// Header padding keeps the file size fixed while the update count grows.
constexpr std::size_t kHeaderAlign = 256;

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                  static_cast<char>((v >> 16) & 0xff),
                                  static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw DataError("model file truncated");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

json header_of(const ModelFile& f) {
  const HwDmdModel& m = f.model;
  return json{
      {"lags", m.hyper.lags.od_lags},
      {"rank_x", m.hyper.rank_x},
      {"rank_y", m.hyper.rank_y},
      {"rho", m.hyper.rho},
      {"stations", m.stations},
      {"intervals_per_day", m.intervals_per_day},
      {"interval_minutes", f.interval_minutes},
      {"day_start_minute", f.day_start_minute},
      {"width_x", m.width_x()},
      {"width_y", m.width_y()},
      {"station_codes", f.station_codes},
      {"station_hash", f.station_hash},
      {"last_day", f.last_day ? format_date(*f.last_day) : std::string{}},
      {"update_count", f.update_count},
      {"vectorization", "column-major"},
  };
}

void expect_shape(const Matrix& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DataError(std::string("model file: ") + name + " has shape " + std::to_string(m.rows()) +
                    "x" + std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
}

}  // namespace

void write_model(std::ostream& out, const ModelFile& f) {
  std::string header = header_of(f).dump();
  header.resize((header.size() + kHeaderAlign - 1) / kHeaderAlign * kHeaderAlign, ' ');
  out.write(kModelMagic, sizeof kModelMagic);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const HwDmdModel& m = f.model;
  for (const Matrix* mat :
       {&m.basis_x, &m.basis_y, &m.cross, &m.gram_x, &m.gram_y, &f.recent_od, &f.recent_boarding}) {
    matrix_io::write_binary(out, *mat);
  }
  if (!out) throw IoError("failed writing model");
}

ModelFile read_model(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), 8);
  if (!in || !std::equal(magic.begin(), magic.end(), kModelMagic)) {
    throw DataError("not an HW-DMD model file (bad magic)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kModelVersion) {
    throw DataError("unsupported model file version " + std::to_string(version));
  }
  const std::uint32_t length = get_u32(in);
  std::string text(length, '\0');
  in.read(text.data(), length);
  if (!in) throw DataError("model file truncated in header");

  ModelFile f;
  HwDmdModel& m = f.model;
  try {
    const json h = json::parse(text);
    m.hyper.lags = LagSpec::make(h.at("lags").get<std::vector<Index>>());
    m.hyper.rank_x = h.at("rank_x").get<Index>();
    m.hyper.rank_y = h.at("rank_y").get<Index>();
    m.hyper.rho = h.at("rho").get<double>();
    m.stations = h.at("stations").get<Index>();
    m.intervals_per_day = h.at("intervals_per_day").get<Index>();
    f.interval_minutes = h.at("interval_minutes").get<int>();
    f.day_start_minute = h.at("day_start_minute").get<int>();
    f.station_codes = h.at("station_codes").get<std::vector<std::string>>();
    f.station_hash = h.at("station_hash").get<std::uint64_t>();
    const auto last = h.at("last_day").get<std::string>();
    if (!last.empty()) f.last_day = parse_date(last);
    f.update_count = h.at("update_count").get<std::int64_t>();
    if (h.at("vectorization").get<std::string>() != "column-major") {
      throw DataError("unsupported vectorization order in model file");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model file header: ") + e.what());
  }
  m.hyper.validate(m.stations);

  m.basis_x = matrix_io::read_binary(in);
  m.basis_y = matrix_io::read_binary(in);
  m.cross = matrix_io::read_binary(in);
  m.gram_x = matrix_io::read_binary(in);
  m.gram_y = matrix_io::read_binary(in);
  f.recent_od = matrix_io::read_binary(in);
  f.recent_boarding = matrix_io::read_binary(in);

  const Index wx = m.basis_x.cols();
  const Index wy = m.basis_y.cols();
  const Index qh = m.hyper.lags.max_lag();
  expect_shape(m.basis_x, m.input_size(), wx, "U_X");
  expect_shape(m.basis_y, m.od_size(), wy, "U_Y");
  expect_shape(m.cross, wy, wx, "P");
  expect_shape(m.gram_x, wx, wx, "Q_X");
  expect_shape(m.gram_y, wy, wy, "Q_Y");
  expect_shape(f.recent_od, m.od_size(), qh, "recent OD");
  expect_shape(f.recent_boarding, m.stations, qh, "recent boarding");
  if (static_cast<Index>(f.station_codes.size()) != m.stations) {
    throw DataError("model file station dictionary does not match its dimensions");
  }
  return f;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ostringstream out(std::ios::binary);
  write_model(out, file);
  matrix_io::write_file_atomic(path, out.str());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  return read_model(in);
}

}  // namespace hwdmd
