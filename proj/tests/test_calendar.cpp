#include <doctest.h>

#include "hwdmd/calendar.hpp"
#include "hwdmd/error.hpp"

using namespace hwdmd;
using namespace std::chrono;

TEST_CASE("weekday calendar skips weekends and joins Friday to Monday") {
  const auto cal = Calendar::weekdays(sys_days{2019y / January / 4}, sys_days{2019y / January / 8},
                                      30, 36, 360);
  REQUIRE(cal.day_count() == 3);
  CHECK(format_date(cal.service_days[0]) == "2019-01-04");
  CHECK(format_date(cal.service_days[1]) == "2019-01-07");
  CHECK(cal.interval_count() == 108);
  // Last Friday slot and first Monday slot are adjacent intervals.
  CHECK(cal.day_of(35) == 0);
  CHECK(cal.day_of(36) == 1);
  CHECK(cal.slot_of(37) == 1);
  CHECK(cal.first_interval_of_day(2) == 72);
}

TEST_CASE("day ordinal lookup") {
  const auto cal = Calendar::weekdays(sys_days{2019y / January / 7}, sys_days{2019y / January / 18},
                                      30, 36, 360);
  CHECK(cal.day_ordinal(sys_days{2019y / January / 14}) == 5);
  CHECK_FALSE(cal.day_ordinal(sys_days{2019y / January / 12}).has_value());
}

TEST_CASE("calendar validation") {
  Calendar cal;
  cal.service_days = {sys_days{2019y / January / 7}};
  CHECK_NOTHROW(cal.validate());
  cal.intervals_per_day = 37;  // 06:00 + 37 * 30 min runs past midnight
  CHECK_THROWS_AS(cal.validate(), ConfigError);
  cal.intervals_per_day = 36;
  cal.service_days.push_back(sys_days{2019y / January / 7});
  CHECK_THROWS_AS(cal.validate(), ConfigError);
}

TEST_CASE("date round trip and rejection") {
  CHECK(format_date(parse_date("2019-01-31")) == "2019-01-31");
  CHECK_THROWS_AS(parse_date("2019-02-30"), DataError);
  CHECK_THROWS_AS(parse_date("yesterday"), DataError);
}

TEST_CASE("sub-calendar") {
  const auto cal = Calendar::weekdays(sys_days{2019y / January / 7}, sys_days{2019y / January / 18},
                                      30, 36, 360);
  const auto sub = cal.days(2, 5);
  CHECK(sub.day_count() == 3);
  CHECK(sub.service_days.front() == cal.service_days[2]);
  CHECK_THROWS_AS(cal.days(5, 20), ConfigError);
}
