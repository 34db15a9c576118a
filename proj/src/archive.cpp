#include "hwdmd/archive.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hwdmd/error.hpp"

namespace hwdmd {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

const std::string& require(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw DataError("archive meta lacks key '" + key + "'");
  return it->second;
}

std::int64_t require_int(const std::map<std::string, std::string>& meta, const std::string& key) {
  const std::string& text = require(meta, key);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("archive meta key '" + key + "' is not an integer: " + text);
  }
  return value;
}

std::string hex(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << value;
  return out.str();
}

}  // namespace

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    out[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return out;
}

std::string format_key_values(const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& [key, value] : values) out += key + "=" + value + "\n";
  return out;
}

void save_archive(const fs::path& dir, const SnapshotArchive& archive, matrix_io::Format format) {
  const SnapshotSeries& s = archive.series;
  if (archive.stations.size() != s.stations) {
    throw DataError("station dictionary size does not match the series");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const bool text = format == matrix_io::Format::text;
  const std::string ext = text ? ".csv" : ".bin";
  matrix_io::save(dir / ("od" + ext), s.od, format);
  matrix_io::save(dir / ("boarding" + ext), s.boarding, format);

  std::vector<std::string> days;
  for (const auto day : s.calendar.service_days) days.push_back(format_date(day));
  const std::map<std::string, std::string> meta{
      {"format_version", "1"},
      {"stations", std::to_string(s.stations)},
      {"intervals_per_day", std::to_string(s.calendar.intervals_per_day)},
      {"interval_minutes", std::to_string(s.calendar.interval_minutes)},
      {"day_start_minute", std::to_string(s.calendar.day_start_minute)},
      {"days", join(days)},
      {"vectorization", "column-major"},
      {"station_codes", join(archive.stations.codes())},
      {"station_hash", hex(archive.stations.hash())},
      {"matrix_format", text ? "text" : "binary"},
      {"dropped_same_station", std::to_string(archive.dropped.same_station)},
      {"dropped_outside_calendar", std::to_string(archive.dropped.outside_calendar)},
      {"dropped_outside_window", std::to_string(archive.dropped.outside_window)},
      {"dropped_spans_boundary", std::to_string(archive.dropped.spans_boundary)},
      {"dropped_invalid_times", std::to_string(archive.dropped.invalid_times)},
  };
  // meta goes last so a directory with a readable meta has both matrices.
  matrix_io::write_file_atomic(dir / "meta", format_key_values(meta));
}

SnapshotArchive load_archive(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("snapshot archive not found: " + dir.string());
  const auto meta = read_key_values(dir / "meta");
  if (require(meta, "vectorization") != "column-major") {
    throw DataError("unsupported vectorization order " + require(meta, "vectorization"));
  }
  SnapshotArchive archive;
  SnapshotSeries& s = archive.series;
  s.stations = require_int(meta, "stations");
  s.calendar.intervals_per_day = require_int(meta, "intervals_per_day");
  s.calendar.interval_minutes = static_cast<int>(require_int(meta, "interval_minutes"));
  s.calendar.day_start_minute = static_cast<int>(require_int(meta, "day_start_minute"));
  for (const auto& day : split_list(require(meta, "days"))) {
    s.calendar.service_days.push_back(parse_date(day));
  }
  s.calendar.validate();
  archive.stations = StationDictionary::from_codes(split_list(require(meta, "station_codes")));
  if (archive.stations.size() != s.stations) {
    throw DataError("archive station dictionary has " + std::to_string(archive.stations.size()) +
                    " codes for " + std::to_string(s.stations) + " stations");
  }
  archive.dropped.same_station = require_int(meta, "dropped_same_station");
  archive.dropped.outside_calendar = require_int(meta, "dropped_outside_calendar");
  archive.dropped.outside_window = require_int(meta, "dropped_outside_window");
  archive.dropped.spans_boundary = require_int(meta, "dropped_spans_boundary");
  archive.dropped.invalid_times = require_int(meta, "dropped_invalid_times");

  const std::string ext = require(meta, "matrix_format") == "text" ? ".csv" : ".bin";
  s.od = matrix_io::load(dir / ("od" + ext));
  s.boarding = matrix_io::load(dir / ("boarding" + ext));
  const Index T = s.calendar.interval_count();
  if (s.od.rows() != s.od_size() || s.od.cols() != T || s.boarding.rows() != s.stations ||
      s.boarding.cols() != T) {
    throw DataError("archive matrices do not match meta dimensions");
  }
  return archive;
}

}  // namespace hwdmd
