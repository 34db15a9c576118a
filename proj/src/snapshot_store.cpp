#include "hwdmd/snapshot_store.hpp"

#include <string>

#include "hwdmd/error.hpp"
#include "hwdmd/kernels.hpp"

namespace hwdmd {

namespace chr = std::chrono;

SnapshotSeries SnapshotSeries::days(Index first_day, Index last_day) const {
  SnapshotSeries out;
  out.stations = stations;
  out.calendar = calendar.days(first_day, last_day);
  const Index d = calendar.intervals_per_day;
  const Index begin = first_day * d;
  const Index count = (last_day - first_day) * d;
  out.od = od.middleCols(begin, count);
  out.boarding = boarding.middleCols(begin, count);
  return out;
}

BuildResult build_series(std::span<const TripRecord> trips, const Calendar& calendar,
                         Index stations) {
  calendar.validate();
  if (stations <= 0) throw ConfigError("station count must be positive");

  const std::int64_t interval_seconds = std::int64_t{calendar.interval_minutes} * 60;
  const std::int64_t window_seconds = interval_seconds * calendar.intervals_per_day;
  const std::int64_t start_seconds = std::int64_t{calendar.day_start_minute} * 60;

  BuildResult result;
  std::vector<kernels::TripCell> cells;
  cells.reserve(trips.size());

  for (std::size_t k = 0; k < trips.size(); ++k) {
    const TripRecord& trip = trips[k];
    if (trip.origin < 0 || trip.origin >= stations || trip.destination < 0 ||
        trip.destination >= stations) {
      throw DataError("trip record " + std::to_string(k) + ": station index out of range [0, " +
                      std::to_string(stations) + ")");
    }
    if (trip.exit_time < trip.entry_time) {
      ++result.dropped.invalid_times;
      continue;
    }
    if (trip.origin == trip.destination) {
      ++result.dropped.same_station;
      continue;
    }
    const auto entry = chr::sys_seconds{chr::seconds{trip.entry_time}};
    const auto date = chr::floor<chr::days>(entry);
    const auto ordinal = calendar.day_ordinal(date);
    if (!ordinal) {
      ++result.dropped.outside_calendar;
      continue;
    }
    const std::int64_t window_begin =
        chr::duration_cast<chr::seconds>(date.time_since_epoch()).count() + start_seconds;
    const std::int64_t offset = trip.entry_time - window_begin;
    if (offset < 0 || offset >= window_seconds) {
      ++result.dropped.outside_window;
      continue;
    }
    if (trip.exit_time >= window_begin + window_seconds) {
      ++result.dropped.spans_boundary;
      continue;
    }
    const Index interval = *ordinal * calendar.intervals_per_day + offset / interval_seconds;
    cells.push_back({interval, od_index(trip.origin, trip.destination, stations)});
  }

  SnapshotSeries& series = result.series;
  series.stations = stations;
  series.calendar = calendar;
  series.od = Matrix::Zero(stations * stations, calendar.interval_count());
  kernels::parallel::accumulate_trips(cells, series.od);
  series.boarding = boarding_from_od(series.od, stations);
  return result;
}

Matrix boarding_from_od(const Matrix& od, Index stations) {
  Matrix boarding(stations, od.cols());
  kernels::parallel::od_row_sums(od, stations, boarding);
  return boarding;
}

bool satisfies_boarding_identity(const SnapshotSeries& series) {
  const Index s = series.stations;
  if (series.od.rows() != s * s || series.boarding.rows() != s ||
      series.od.cols() != series.boarding.cols()) {
    return false;
  }
  for (Index t = 0; t < series.length(); ++t) {
    for (Index i = 0; i < s; ++i) {
      if (series.od(od_index(i, i, s), t) != 0.0) return false;
      double sum = 0.0;
      for (Index j = 0; j < s; ++j) sum += series.od(od_index(i, j, s), t);
      if (sum != series.boarding(i, t)) return false;
    }
  }
  return true;
}

std::vector<Index> available_od_lags(Index t) {
  if (t < kMinOdLag) {
    throw ConfigError("interval " + std::to_string(t) + " has no available OD lag (needs t >= 3)");
  }
  std::vector<Index> lags;
  lags.reserve(static_cast<std::size_t>(t - kMinOdLag + 1));
  for (Index lag = kMinOdLag; lag <= t; ++lag) lags.push_back(lag);
  return lags;
}

}  // namespace hwdmd
