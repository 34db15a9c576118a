#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hwdmd/estimator.hpp"
#include "hwdmd/synthetic.hpp"
#include "hwdmd/tuning.hpp"

/// One function per CLI subcommand. Each validates its options, runs one
/// pipeline, writes its outputs atomically and logs a summary to `log`.
/// Failures are thrown as hwdmd::Error.
namespace hwdmd::cli {

namespace fs = std::filesystem;

/// Half-open range of service-day ordinals, written "first:last".
struct DayRange {
  Index first = 0;
  Index last = 0;

  Index count() const { return last - first; }
  static DayRange parse(const std::string& text);
  std::string to_string() const;
};

struct BuildOptions {
  fs::path trips;
  fs::path out;
  /// Calendar bounds (YYYY-MM-DD); default to the range of trip entry dates.
  std::string first_date;
  std::string last_date;
  int interval_minutes = 30;
  int day_start_minute = 6 * 60;
  int day_end_minute = 24 * 60;
  bool text = false;
};

struct TrainOptions {
  fs::path snapshots;
  fs::path model;
  DayRange train;
  HwDmdHyper hyper;
};

struct UpdateOptions {
  fs::path model;
  /// Exactly one of `trips` (one day of trip records) or `snapshots` (an
  /// archive containing `day`) is set.
  fs::path trips;
  fs::path snapshots;
  std::string day;
  double expand_tolerance = 1e-8;
};

struct ForecastOptions {
  fs::path snapshots;
  fs::path model;
  fs::path out;
  DayRange test;
  Index horizon = 1;
  bool clamp = false;
  /// Update the model in memory at the end of each test day.
  bool online = false;
  bool text = false;
};

struct EvaluateOptions {
  fs::path snapshots;
  fs::path forecasts;
  fs::path out;
  /// Adds the low-rank bound rows.
  fs::path model;
  /// Adds Historical Average rows fitted on these days.
  std::optional<DayRange> train;
  /// Adds clamped rows when the forecasts are raw.
  bool clamp = false;
};

struct TuneOptions {
  fs::path snapshots;
  fs::path out;
  DayRange train;
  DayRange validation;
  HwDmdHyper base;
  std::vector<Index> candidates;
  Index max_lags = 10;
  bool search_lags = true;
  SearchGrids grids = SearchGrids::defaults();
};

struct DmdOptions {
  fs::path prev;
  fs::path next;
  fs::path out;
  Index rank = 1;
};

struct SynthOptions {
  SyntheticSpec spec;
  fs::path out;
  bool text = false;
};

void cmd_build(const BuildOptions& options, std::ostream& log);
void cmd_train(const TrainOptions& options, std::ostream& log);
void cmd_update(const UpdateOptions& options, std::ostream& log);
void cmd_forecast(const ForecastOptions& options, std::ostream& log);
void cmd_evaluate(const EvaluateOptions& options, std::ostream& log);
void cmd_tune(const TuneOptions& options, std::ostream& log);
void cmd_dmd(const DmdOptions& options, std::ostream& log);
void cmd_synth(const SynthOptions& options, std::ostream& log);

/// Parses "3,4,8" or "3:36" (inclusive range) into a list of integers.
std::vector<Index> parse_index_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace hwdmd::cli
