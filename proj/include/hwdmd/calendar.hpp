#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "hwdmd/types.hpp"

namespace hwdmd {

/// Fixed interval grid over concatenated service days.
///
/// Global interval i belongs to day `i / intervals_per_day` at slot
/// `i % intervals_per_day`. Consecutive service days are adjacent on the grid,
/// so a Friday is followed directly by the next Monday.
struct Calendar {
  int interval_minutes = 30;
  Index intervals_per_day = 36;
  /// Start of the operating window, in minutes after midnight.
  int day_start_minute = 6 * 60;
  std::vector<std::chrono::sys_days> service_days;

  Index day_count() const { return static_cast<Index>(service_days.size()); }
  Index interval_count() const { return day_count() * intervals_per_day; }
  Index day_of(Index interval) const { return interval / intervals_per_day; }
  Index slot_of(Index interval) const { return interval % intervals_per_day; }
  Index first_interval_of_day(Index day) const { return day * intervals_per_day; }

  /// Ordinal of `date` among the service days, if it is one.
  std::optional<Index> day_ordinal(std::chrono::sys_days date) const;

  /// Sub-calendar covering service days [first_day, last_day).
  Calendar days(Index first_day, Index last_day) const;

  /// Throws ConfigError on a non-positive interval, an operating window that
  /// runs past midnight, or unordered/duplicate days.
  void validate() const;

  /// All Monday..Friday dates in [first, last].
  static Calendar weekdays(std::chrono::sys_days first, std::chrono::sys_days last,
                           int interval_minutes, Index intervals_per_day,
                           int day_start_minute);
};

std::string format_date(std::chrono::sys_days date);
/// Parses YYYY-MM-DD; throws DataError otherwise.
std::chrono::sys_days parse_date(const std::string& text);

}  // namespace hwdmd
