#include "hwdmd/calendar.hpp"

#include <algorithm>
#include <cstdio>

#include "hwdmd/error.hpp"

namespace hwdmd {

namespace chr = std::chrono;

std::optional<Index> Calendar::day_ordinal(chr::sys_days date) const {
  const auto it = std::lower_bound(service_days.begin(), service_days.end(), date);
  if (it == service_days.end() || *it != date) return std::nullopt;
  return static_cast<Index>(it - service_days.begin());
}

Calendar Calendar::days(Index first_day, Index last_day) const {
  if (first_day < 0 || last_day > day_count() || first_day > last_day) {
    throw ConfigError("day range [" + std::to_string(first_day) + ", " +
                      std::to_string(last_day) + ") outside calendar of " +
                      std::to_string(day_count()) + " days");
  }
  Calendar out = *this;
  out.service_days.assign(service_days.begin() + first_day, service_days.begin() + last_day);
  return out;
}

void Calendar::validate() const {
  if (interval_minutes <= 0) throw ConfigError("interval length must be positive");
  if (intervals_per_day <= 0) throw ConfigError("intervals per day must be positive");
  if (day_start_minute < 0 ||
      day_start_minute + interval_minutes * intervals_per_day > 24 * 60) {
    throw ConfigError("operating window must lie within one calendar day");
  }
  for (std::size_t i = 1; i < service_days.size(); ++i) {
    if (service_days[i] <= service_days[i - 1]) {
      throw ConfigError("service days must be strictly increasing");
    }
  }
}

Calendar Calendar::weekdays(chr::sys_days first, chr::sys_days last, int interval_minutes,
                            Index intervals_per_day, int day_start_minute) {
  Calendar cal;
  cal.interval_minutes = interval_minutes;
  cal.intervals_per_day = intervals_per_day;
  cal.day_start_minute = day_start_minute;
  for (auto day = first; day <= last; day += chr::days{1}) {
    const chr::weekday wd{day};
    if (wd != chr::Saturday && wd != chr::Sunday) cal.service_days.push_back(day);
  }
  cal.validate();
  return cal;
}

std::string format_date(chr::sys_days date) {
  const chr::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

chr::sys_days parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
    throw DataError("invalid date '" + text + "', expected YYYY-MM-DD");
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) throw DataError("invalid date '" + text + "'");
  return chr::sys_days{ymd};
}

}  // namespace hwdmd
