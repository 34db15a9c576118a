#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hwdmd/calendar.hpp"
#include "hwdmd/types.hpp"

namespace hwdmd {

/// One metro trip with dense station indices. Times are seconds since the
/// epoch, read as civil time (no time-zone conversion is applied).
struct TripRecord {
  Index origin = 0;
  Index destination = 0;
  std::int64_t entry_time = 0;
  std::int64_t exit_time = 0;
};

/// Reasons a trip is not counted. `total()` plus the counted trips always
/// equals the number of records ingested.
struct DropCounts {
  std::int64_t same_station = 0;
  std::int64_t outside_calendar = 0;  // not a service day (weekend etc.)
  std::int64_t outside_window = 0;    // before/after operating hours
  std::int64_t spans_boundary = 0;    // exits after the service day ends
  std::int64_t invalid_times = 0;     // exit earlier than entry

  std::int64_t total() const {
    return same_station + outside_calendar + outside_window + spans_boundary + invalid_times;
  }
};

/// Aligned OD and boarding snapshots on a calendar grid.
///
/// Column t of `od` is vec(O_t) in column-major order: the flow from origin i
/// to destination j sits at row `j * stations + i`. Column t of `boarding`
/// holds the row sums of O_t.
struct SnapshotSeries {
  Index stations = 0;
  Matrix od;
  Matrix boarding;
  Calendar calendar;

  Index od_size() const { return stations * stations; }
  Index length() const { return od.cols(); }

  /// Sub-series covering service days [first_day, last_day).
  SnapshotSeries days(Index first_day, Index last_day) const;
};

struct BuildResult {
  SnapshotSeries series;
  DropCounts dropped;
};

inline Index od_index(Index origin, Index destination, Index stations) {
  return destination * stations + origin;
}

/// Counts trips by entry interval. Records outside the calendar are dropped and
/// counted; a station index >= `stations` is rejected with a DataError naming
/// the record position.
BuildResult build_series(std::span<const TripRecord> trips, const Calendar& calendar,
                         Index stations);

/// Row sums of each OD column, i.e. the boarding snapshot implied by an OD
/// snapshot.
Matrix boarding_from_od(const Matrix& od, Index stations);

/// True when every boarding entry equals its OD row sum exactly and no OD
/// diagonal entry is non-zero.
bool satisfies_boarding_identity(const SnapshotSeries& series);

/// OD lags usable at interval t under delayed availability: {3, ..., t}.
/// OD snapshots one and two intervals old are still in progress.
std::vector<Index> available_od_lags(Index t);

inline constexpr Index kMinOdLag = 3;

inline bool od_lag_available(Index lag) { return lag >= kMinOdLag; }
inline bool boarding_lag_available(Index lag) { return lag >= 1; }

}  // namespace hwdmd
