#include "hwdmd/trip_csv.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "hwdmd/error.hpp"

namespace hwdmd {

namespace chr = std::chrono;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

bool is_epoch(std::string_view s) { return parse_integer(s).has_value(); }

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

StationDictionary StationDictionary::from_codes(std::vector<std::string> codes) {
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  const bool numeric = std::all_of(codes.begin(), codes.end(),
                                   [](const std::string& c) { return is_epoch(c); });
  if (numeric) {
    std::sort(codes.begin(), codes.end(), [](const std::string& a, const std::string& b) {
      return *parse_integer(a) < *parse_integer(b);
    });
  }
  StationDictionary dict;
  dict.codes_ = std::move(codes);
  for (std::size_t i = 0; i < dict.codes_.size(); ++i) {
    dict.index_.emplace(dict.codes_[i], static_cast<Index>(i));
  }
  return dict;
}

std::optional<Index> StationDictionary::index_of(std::string_view code) const {
  const auto it = index_.find(std::string(code));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t StationDictionary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const std::string& code : codes_) {
    for (const char c : code) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

std::optional<std::int64_t> parse_iso8601(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  auto number = [&text](std::size_t pos, std::size_t len, int& out) {
    if (pos + len > text.size()) return false;
    const auto sub = text.substr(pos, len);
    const auto [ptr, ec] = std::from_chars(sub.data(), sub.data() + len, out);
    return ec == std::errc{} && ptr == sub.data() + len;
  };
  if (text.size() < 16 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':') {
    return std::nullopt;
  }
  if (!number(0, 4, y) || !number(5, 2, mo) || !number(8, 2, d) || !number(11, 2, hh) ||
      !number(14, 2, mm)) {
    return std::nullopt;
  }
  std::size_t pos = 16;
  if (pos < text.size()) {
    if (text[pos] != ':' || !number(pos + 1, 2, ss)) return std::nullopt;
    pos += 3;
    if (pos < text.size()) {
      if (text[pos] != '.') return std::nullopt;
      for (++pos; pos < text.size(); ++pos) {
        if (text[pos] < '0' || text[pos] > '9') return std::nullopt;
      }
    }
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  const auto days = chr::sys_days{ymd}.time_since_epoch();
  return chr::duration_cast<chr::seconds>(days).count() + hh * 3600 + mm * 60 + ss;
}

TripTable read_trip_csv(std::istream& in) {
  TripTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("trip CSV is empty (missing header)");
  const auto header = split(line);
  const std::vector<std::string_view> expected{"origin", "destination", "entry_time", "exit_time"};
  if (header != expected) {
    throw DataError("trip CSV header must be origin,destination,entry_time,exit_time");
  }
  bool detected = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 4) {
      throw DataError("trip CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    if (!detected) {
      table.format = is_epoch(cells[2]) ? TimeFormat::epoch_seconds : TimeFormat::iso8601;
      detected = true;
    }
    auto time_of = [&](std::string_view cell) {
      const auto value =
          table.format == TimeFormat::epoch_seconds ? parse_integer(cell) : parse_iso8601(cell);
      if (!value) {
        throw DataError("trip CSV line " + std::to_string(line_no) + ": timestamp '" +
                        std::string(cell) + "' does not match the file's format");
      }
      return *value;
    };
    table.trips.push_back(
        {std::string(cells[0]), std::string(cells[1]), time_of(cells[2]), time_of(cells[3])});
  }
  return table;
}

TripTable read_trip_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trip file " + path.string());
  return read_trip_csv(in);
}

StationDictionary dictionary_of(const TripTable& table) {
  std::set<std::string> codes;
  for (const RawTrip& t : table.trips) {
    codes.insert(t.origin);
    codes.insert(t.destination);
  }
  return StationDictionary::from_codes({codes.begin(), codes.end()});
}

std::vector<TripRecord> to_records(const TripTable& table, const StationDictionary& stations) {
  std::vector<TripRecord> out;
  out.reserve(table.trips.size());
  for (std::size_t k = 0; k < table.trips.size(); ++k) {
    const RawTrip& t = table.trips[k];
    const auto o = stations.index_of(t.origin);
    const auto d = stations.index_of(t.destination);
    if (!o || !d) {
      throw DataError("trip record " + std::to_string(k) + ": unknown station code '" +
                      (o ? t.destination : t.origin) + "'");
    }
    out.push_back({*o, *d, t.entry_time, t.exit_time});
  }
  return out;
}

}  // namespace hwdmd
