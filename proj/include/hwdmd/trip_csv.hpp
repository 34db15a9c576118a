#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hwdmd/snapshot_store.hpp"

namespace hwdmd {

/// Maps raw station codes to dense indices 0..s-1. Codes are sorted
/// (numerically when every code is an integer), so the mapping does not depend
/// on the order in which trips were read.
class StationDictionary {
 public:
  StationDictionary() = default;
  static StationDictionary from_codes(std::vector<std::string> codes);

  std::optional<Index> index_of(std::string_view code) const;
  const std::vector<std::string>& codes() const { return codes_; }
  Index size() const { return static_cast<Index>(codes_.size()); }
  /// FNV-1a over the newline-joined codes.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> codes_;
  std::unordered_map<std::string, Index> index_;
};

struct RawTrip {
  std::string origin;
  std::string destination;
  std::int64_t entry_time = 0;
  std::int64_t exit_time = 0;
};

enum class TimeFormat { iso8601, epoch_seconds };

struct TripTable {
  std::vector<RawTrip> trips;
  TimeFormat format = TimeFormat::iso8601;
};

/// Reads `origin,destination,entry_time,exit_time`. The timestamp format is
/// detected once from the first record and then required of every row.
TripTable read_trip_csv(std::istream& in);
TripTable read_trip_csv(const std::filesystem::path& path);

/// Seconds since the epoch for "YYYY-MM-DD[T ]HH:MM[:SS[.fff]]", read as civil
/// time. Returns nullopt when the text is not in that form.
std::optional<std::int64_t> parse_iso8601(std::string_view text);

/// Dictionary over every code seen as an origin or destination.
StationDictionary dictionary_of(const TripTable& table);

/// Dense records; an unknown code is a DataError naming the record position.
std::vector<TripRecord> to_records(const TripTable& table, const StationDictionary& stations);

}  // namespace hwdmd
