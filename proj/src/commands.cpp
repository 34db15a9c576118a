#include "hwdmd/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <ostream>
#include <sstream>

#include "hwdmd/archive.hpp"
#include "hwdmd/error.hpp"
#include "hwdmd/evaluation.hpp"
#include "hwdmd/exact_dmd.hpp"
#include "hwdmd/matrix_io.hpp"
#include "hwdmd/model_io.hpp"
#include "hwdmd/online.hpp"
#include "hwdmd/trip_csv.hpp"

namespace hwdmd::cli {

namespace chr = std::chrono;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double seconds_since(chr::steady_clock::time_point start) {
  return chr::duration<double>(chr::steady_clock::now() - start).count();
}

Index parse_index(const std::string& text, const std::string& what) {
  Index value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(what + ": '" + text + "' is not an integer");
  }
  return value;
}

matrix_io::Format format_of(bool text) {
  return text ? matrix_io::Format::text : matrix_io::Format::binary;
}

std::string ext_of(bool text) { return text ? ".csv" : ".bin"; }

void check_days(const DayRange& range, Index day_count, const std::string& what) {
  if (range.first < 0 || range.first >= range.last || range.last > day_count) {
    throw ConfigError(what + " days " + range.to_string() + " must be a non-empty range inside [0, " +
                      std::to_string(day_count) + ")");
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void check_compatible(const ModelFile& file, const SnapshotArchive& archive) {
  if (file.station_hash != archive.stations.hash()) {
    throw DataError("station dictionary of the snapshots does not match the model");
  }
  const Calendar& cal = archive.series.calendar;
  if (file.model.intervals_per_day != cal.intervals_per_day ||
      file.interval_minutes != cal.interval_minutes ||
      file.day_start_minute != cal.day_start_minute) {
    throw DataError("interval grid of the snapshots does not match the model");
  }
}

/// Exclusive advisory lock on `<model>.lock`, released on destruction.
class FileLock {
 public:
  explicit FileLock(const fs::path& target) : path_(target.string() + ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + path_ + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      const int err = errno;
      ::close(fd_);
      if (err == EWOULDBLOCK) throw IoError("model is locked by another writer: " + path_);
      throw IoError("cannot lock " + path_ + ": " + std::strerror(err));
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

void write_metrics_row(std::string& csv, const std::string& quantity, Index horizon,
                       const MetricReport& m) {
  csv += quantity + "," + std::to_string(horizon) + "," + num(m.rmse) + "," + num(m.wmape) + "," +
         num(m.r2) + "\n";
}

void write_rolling(const fs::path& dir, const RollingForecast& fc, bool text) {
  for (Index k = 0; k < fc.horizon(); ++k) {
    const std::string h = std::to_string(k + 1);
    matrix_io::save(dir / ("od_h" + h + ext_of(text)), fc.od[static_cast<std::size_t>(k)],
                    format_of(text));
    matrix_io::save(dir / ("boarding_h" + h + ext_of(text)),
                    fc.boarding[static_cast<std::size_t>(k)], format_of(text));
  }
}

}  // namespace

DayRange DayRange::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("day range '" + text + "' must be first:last");
  return {parse_index(text.substr(0, colon), "day range"),
          parse_index(text.substr(colon + 1), "day range")};
}

std::string DayRange::to_string() const {
  return std::to_string(first) + ":" + std::to_string(last);
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const Index a = parse_index(text.substr(0, colon), "range");
    const Index b = parse_index(text.substr(colon + 1), "range");
    if (b < a) throw ConfigError("empty range '" + text + "'");
    for (Index v = a; v <= b; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_index(item, "list"));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

void cmd_build(const BuildOptions& o, std::ostream& log) {
  if (o.interval_minutes <= 0 || o.day_start_minute < 0 || o.day_end_minute > 24 * 60 ||
      o.day_end_minute <= o.day_start_minute ||
      (o.day_end_minute - o.day_start_minute) % o.interval_minutes != 0) {
    throw ConfigError("operating window must be a positive whole number of intervals within a day");
  }
  const TripTable table = read_trip_csv(o.trips);
  if (table.trips.empty()) throw DataError("trip file has no records");
  const StationDictionary stations = dictionary_of(table);
  const std::vector<TripRecord> records = to_records(table, stations);

  auto date_of = [](std::int64_t t) {
    return chr::sys_days{chr::floor<chr::days>(chr::sys_seconds{chr::seconds{t}})};
  };
  chr::sys_days first = date_of(records.front().entry_time);
  chr::sys_days last = first;
  for (const TripRecord& r : records) {
    first = std::min(first, date_of(r.entry_time));
    last = std::max(last, date_of(r.entry_time));
  }
  if (!o.first_date.empty()) first = parse_date(o.first_date);
  if (!o.last_date.empty()) last = parse_date(o.last_date);
  if (last < first) throw ConfigError("last date precedes first date");

  const Index d = (o.day_end_minute - o.day_start_minute) / o.interval_minutes;
  const Calendar calendar =
      Calendar::weekdays(first, last, o.interval_minutes, d, o.day_start_minute);
  if (calendar.day_count() == 0) throw ConfigError("calendar range contains no weekdays");

  BuildResult built = build_series(records, calendar, stations.size());
  const SnapshotArchive archive{std::move(built.series), stations, built.dropped};
  save_archive(o.out, archive, format_of(o.text));

  const DropCounts& dr = archive.dropped;
  log << "build: stations=" << stations.size() << " days=" << calendar.day_count()
      << " intervals_per_day=" << d << " records=" << records.size()
      << " counted=" << static_cast<std::int64_t>(records.size()) - dr.total() << "\n"
      << "build: dropped same_station=" << dr.same_station
      << " outside_calendar=" << dr.outside_calendar << " outside_window=" << dr.outside_window
      << " spans_boundary=" << dr.spans_boundary << " invalid_times=" << dr.invalid_times << "\n";
}

void cmd_train(const TrainOptions& o, std::ostream& log) {
  const SnapshotArchive archive = load_archive(o.snapshots);
  const SnapshotSeries& series = archive.series;
  check_days(o.train, series.calendar.day_count(), "training");
  o.hyper.validate(series.stations);

  const SnapshotSeries train = series.days(o.train.first, o.train.last);
  const auto start = chr::steady_clock::now();
  ModelFile file;
  file.model = fit(train, o.hyper);
  const double elapsed = seconds_since(start);

  const Index qh = o.hyper.lags.max_lag();
  file.station_codes = archive.stations.codes();
  file.station_hash = archive.stations.hash();
  file.interval_minutes = series.calendar.interval_minutes;
  file.day_start_minute = series.calendar.day_start_minute;
  file.last_day = train.calendar.service_days.back();
  file.recent_od = train.od.rightCols(qh);
  file.recent_boarding = train.boarding.rightCols(qh);
  save_model(o.model, file);

  log << "train: days=" << o.train.to_string() << " lags=" << o.hyper.lags.to_string()
      << " width_x=" << file.model.width_x() << " width_y=" << file.model.width_y()
      << " rho=" << num(o.hyper.rho) << "\n"
      << "train: elapsed_seconds=" << num(elapsed) << "\n";
}

void cmd_update(const UpdateOptions& o, std::ostream& log) {
  if (o.trips.empty() == o.snapshots.empty()) {
    throw ConfigError("update needs exactly one of --trips or --snapshots");
  }
  if (o.day.empty()) throw ConfigError("update needs --day");
  const chr::sys_days day = parse_date(o.day);

  const FileLock lock(o.model);
  ModelFile file = load_model(o.model);
  HwDmdModel& model = file.model;
  if (file.last_day && day <= *file.last_day) {
    throw DataError("day " + o.day + " is not after the last absorbed day " +
                    format_date(*file.last_day));
  }
  const Index d = model.intervals_per_day;
  const Index s = model.stations;

  SnapshotSeries today;
  if (!o.trips.empty()) {
    const TripTable table = read_trip_csv(o.trips);
    const StationDictionary stations = StationDictionary::from_codes(file.station_codes);
    Calendar cal;
    cal.interval_minutes = file.interval_minutes;
    cal.intervals_per_day = d;
    cal.day_start_minute = file.day_start_minute;
    cal.service_days = {day};
    BuildResult built = build_series(to_records(table, stations), cal, s);
    const DropCounts& dr = built.dropped;
    log << "update: records=" << table.trips.size() << " dropped=" << dr.total()
        << " (same_station=" << dr.same_station << " outside_calendar=" << dr.outside_calendar
        << " outside_window=" << dr.outside_window << " spans_boundary=" << dr.spans_boundary
        << " invalid_times=" << dr.invalid_times << ")\n";
    today = std::move(built.series);
  } else {
    const SnapshotArchive archive = load_archive(o.snapshots);
    check_compatible(file, archive);
    const auto ordinal = archive.series.calendar.day_ordinal(day);
    if (!ordinal) throw DataError("day " + o.day + " is not in the snapshot archive");
    today = archive.series.days(*ordinal, *ordinal + 1);
  }

  // Lay the ring buffer out on whole padding days so the batch sits on day
  // `pad` of a regular grid.
  const Index qh = model.hyper.lags.max_lag();
  const Index pad = (qh + d - 1) / d;
  SnapshotSeries window;
  window.stations = s;
  window.calendar = today.calendar;
  window.calendar.service_days.clear();
  for (Index k = pad; k > 0; --k) window.calendar.service_days.push_back(day - chr::days{k});
  window.calendar.service_days.push_back(day);
  window.od = Matrix::Zero(model.od_size(), (pad + 1) * d);
  window.boarding = Matrix::Zero(s, (pad + 1) * d);
  window.od.middleCols(pad * d - qh, qh) = file.recent_od;
  window.boarding.middleCols(pad * d - qh, qh) = file.recent_boarding;
  window.od.rightCols(d) = today.od;
  window.boarding.rightCols(d) = today.boarding;

  const auto start = chr::steady_clock::now();
  online::UpdateOptions options;
  options.expand_tolerance = o.expand_tolerance;
  online::daily_update(model, daily_batch(window, model.hyper.lags, pad), options);
  const double elapsed = seconds_since(start);

  file.recent_od = window.od.rightCols(qh);
  file.recent_boarding = window.boarding.rightCols(qh);
  file.last_day = day;
  ++file.update_count;
  save_model(o.model, file);

  log << "update: day=" << o.day << " updates=" << file.update_count
      << " width_x=" << model.width_x() << " width_y=" << model.width_y() << "\n"
      << "update: elapsed_seconds=" << num(elapsed) << "\n";
}

void cmd_forecast(const ForecastOptions& o, std::ostream& log) {
  if (o.horizon < 1) throw ConfigError("horizon must be >= 1");
  const SnapshotArchive archive = load_archive(o.snapshots);
  const ModelFile file = load_model(o.model);
  check_compatible(file, archive);
  const SnapshotSeries& series = archive.series;
  const Calendar& cal = series.calendar;
  check_days(o.test, cal.day_count(), "test");
  if (file.last_day && cal.service_days[static_cast<std::size_t>(o.test.first)] <= *file.last_day) {
    throw ConfigError("test days must come after the last day the model has seen (" +
                      format_date(*file.last_day) + ")");
  }

  const Index begin = cal.first_interval_of_day(o.test.first);
  const Index end = cal.first_interval_of_day(o.test.last);
  const auto start = chr::steady_clock::now();
  const RollingForecast fc =
      o.online ? online_rolling_forecast(file.model, series, o.test.first, o.test.last, o.horizon,
                                         o.clamp)
               : rolling_forecast(Forecaster(file.model, o.clamp), series, begin, end, o.horizon);
  const double elapsed = seconds_since(start);

  ensure_dir(o.out);
  write_rolling(o.out, fc, o.text);
  const std::map<std::string, std::string> meta{
      {"begin", std::to_string(begin)},
      {"end", std::to_string(end)},
      {"horizon", std::to_string(o.horizon)},
      {"stations", std::to_string(series.stations)},
      {"clamp", o.clamp ? "1" : "0"},
      {"online", o.online ? "1" : "0"},
      {"matrix_format", o.text ? "text" : "binary"},
      {"test_days", o.test.to_string()},
  };
  matrix_io::write_file_atomic(o.out / "meta", format_key_values(meta));
  log << "forecast: targets=" << end - begin << " horizon=" << o.horizon
      << " online=" << (o.online ? 1 : 0) << " clamp=" << (o.clamp ? 1 : 0) << "\n"
      << "forecast: elapsed_seconds=" << num(elapsed) << "\n";
}

void cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
  const SnapshotArchive archive = load_archive(o.snapshots);
  const SnapshotSeries& series = archive.series;
  const auto meta = read_key_values(o.forecasts / "meta");
  auto get = [&](const std::string& key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw DataError("forecast meta lacks '" + key + "'");
    return it->second;
  };
  RollingForecast fc;
  fc.begin = parse_index(get("begin"), "forecast begin");
  fc.end = parse_index(get("end"), "forecast end");
  const Index horizon = parse_index(get("horizon"), "forecast horizon");
  const bool text = get("matrix_format") == "text";
  const bool already_clamped = get("clamp") == "1";
  if (parse_index(get("stations"), "forecast stations") != series.stations || fc.begin < 0 ||
      fc.end > series.length() || fc.end <= fc.begin) {
    throw DataError("forecasts do not fit the snapshot archive");
  }
  for (Index k = 1; k <= horizon; ++k) {
    fc.od.push_back(matrix_io::load(o.forecasts / ("od_h" + std::to_string(k) + ext_of(text))));
    fc.boarding.push_back(
        matrix_io::load(o.forecasts / ("boarding_h" + std::to_string(k) + ext_of(text))));
    if (fc.od.back().rows() != series.od_size() || fc.od.back().cols() != fc.end - fc.begin ||
        fc.boarding.back().rows() != series.stations ||
        fc.boarding.back().cols() != fc.end - fc.begin) {
      throw DataError("forecast matrices for horizon " + std::to_string(k) + " have wrong shape");
    }
  }

  std::string csv = "quantity,horizon,rmse,wmape,r2\n";
  auto add_rows = [&](const RollingForecast& f, const std::string& od, const std::string& b) {
    for (const HorizonReport& r : evaluate(f, series)) {
      write_metrics_row(csv, od, r.horizon, r.flows.od);
      write_metrics_row(csv, b, r.horizon, r.flows.boarding);
    }
  };
  add_rows(fc, "od", "boarding");
  if (o.clamp && !already_clamped) {
    add_rows(clamped(fc, series.stations), "od_clamped", "boarding_clamped");
  }
  if (o.train) {
    check_days(*o.train, series.calendar.day_count(), "training");
    if (series.calendar.first_interval_of_day(o.train->last) > fc.begin) {
      throw ConfigError("HA training days must precede the forecast targets");
    }
    const HistoricalAverage ha =
        HistoricalAverage::fit(series.days(o.train->first, o.train->last));
    add_rows(historical_average_forecast(ha, fc.begin, fc.end, horizon, series.stations), "ha_od",
             "ha_boarding");
  }
  if (!o.model.empty()) {
    const ModelFile file = load_model(o.model);
    check_compatible(file, archive);
    const FlowReport bound = low_rank_bound(series, fc.begin, fc.end, file.model.basis_y);
    write_metrics_row(csv, "bound_od", 0, bound.od);
    write_metrics_row(csv, "bound_boarding", 0, bound.boarding);
  }

  const Matrix actual = series.od.middleCols(fc.begin, fc.end - fc.begin);
  std::string slots = "horizon,slot,rmse,wmape,r2\n";
  std::string bins = "horizon,lower,upper,count,rmse,wmape,r2\n";
  for (Index k = 0; k < horizon; ++k) {
    const Matrix& pred = fc.od[static_cast<std::size_t>(k)];
    for (const SlotError& e :
         per_slot_breakdown(actual, pred, fc.begin, series.calendar.intervals_per_day)) {
      slots += std::to_string(k + 1) + "," + std::to_string(e.slot) + "," + num(e.od.rmse) + "," +
               num(e.od.wmape) + "," + num(e.od.r2) + "\n";
    }
    for (const MagnitudeBin& b : magnitude_breakdown(actual, pred)) {
      bins += std::to_string(k + 1) + "," + num(b.lower) + "," + num(b.upper) + "," +
              std::to_string(b.od.count) + "," + num(b.od.rmse) + "," + num(b.od.wmape) + "," +
              num(b.od.r2) + "\n";
    }
  }

  ensure_dir(o.out);
  matrix_io::write_file_atomic(o.out / "metrics.csv", csv);
  matrix_io::write_file_atomic(o.out / "per_slot.csv", slots);
  matrix_io::write_file_atomic(o.out / "magnitude.csv", bins);
  log << csv;
}

void cmd_tune(const TuneOptions& o, std::ostream& log) {
  const SnapshotArchive archive = load_archive(o.snapshots);
  const SnapshotSeries& series = archive.series;
  const Index days = series.calendar.day_count();
  check_days(o.train, days, "training");
  check_days(o.validation, days, "validation");
  if (o.validation.first < o.train.last) {
    throw ConfigError("validation days must follow the training days");
  }
  const SnapshotSeries window = series.days(o.train.first, o.validation.last);
  const HyperScorer scorer =
      validation_scorer(window, o.train.count(), o.validation.first - o.train.first,
                        o.validation.last - o.train.first);

  const auto start = chr::steady_clock::now();
  std::vector<std::pair<std::string, TuneStep>> trace;
  HwDmdHyper best = o.base;
  if (o.search_lags) {
    std::vector<Index> candidates = o.candidates;
    if (candidates.empty()) {
      for (Index q = kMinOdLag; q <= series.calendar.intervals_per_day; ++q) candidates.push_back(q);
    }
    TuneResult lags = greedy_lag_search(scorer, best, candidates, o.max_lags);
    for (TuneStep& step : lags.trace) trace.emplace_back("lags", std::move(step));
    best = lags.hyper;
  }
  TuneResult ranks = rank_and_rho_search(scorer, best, series.stations, o.grids);
  for (TuneStep& step : ranks.trace) trace.emplace_back("ranks_rho", std::move(step));
  best = ranks.hyper;
  const double elapsed = seconds_since(start);

  std::string csv = "stage,lags,rank_x,rank_y,rho,rmse,accepted\n";
  for (const auto& [stage, step] : trace) {
    csv += stage + ",\"" + LagSpec{step.lags}.to_string() + "\"," + std::to_string(step.rank_x) +
           "," + std::to_string(step.rank_y) + "," + num(step.rho) + "," + num(step.rmse) + "," +
           (step.accepted ? "1" : "0") + "\n";
  }
  const std::map<std::string, std::string> conf{
      {"lags", best.lags.to_string()},
      {"rx", std::to_string(best.rank_x)},
      {"ry", std::to_string(best.rank_y)},
      {"rho", num(best.rho)},
  };
  ensure_dir(o.out);
  matrix_io::write_file_atomic(o.out / "trace.csv", csv);
  matrix_io::write_file_atomic(o.out / "best.conf", format_key_values(conf));
  log << "tune: best lags=" << best.lags.to_string() << " rx=" << best.rank_x
      << " ry=" << best.rank_y << " rho=" << num(best.rho)
      << " validation_rmse=" << num(ranks.rmse) << "\n"
      << "tune: evaluations=" << trace.size() << " elapsed_seconds=" << num(elapsed) << "\n";
}

void cmd_dmd(const DmdOptions& o, std::ostream& log) {
  const Matrix prev = matrix_io::load(o.prev);
  const Matrix next = matrix_io::load(o.next);
  const DmdResult r = exact_dmd(prev, next, o.rank);

  std::string values = "index,real,imag,modulus\n";
  for (Index k = 0; k < r.eigenvalues.size(); ++k) {
    const auto lambda = r.eigenvalues(k);
    values += std::to_string(k) + "," + num(lambda.real()) + "," + num(lambda.imag()) + "," +
              num(std::abs(lambda)) + "\n";
  }
  std::string modes = "mode,row,real,imag\n";
  for (Index k = 0; k < r.modes.cols(); ++k) {
    for (Index i = 0; i < r.modes.rows(); ++i) {
      modes += std::to_string(k) + "," + std::to_string(i) + "," + num(r.modes(i, k).real()) + "," +
               num(r.modes(i, k).imag()) + "\n";
    }
  }
  ensure_dir(o.out);
  matrix_io::write_file_atomic(o.out / "eigenvalues.csv", values);
  matrix_io::write_file_atomic(o.out / "modes.csv", modes);
  log << "dmd: rank=" << o.rank << " leading_modulus="
      << num(r.eigenvalues.size() ? std::abs(r.eigenvalues(0)) : 0.0) << "\n";
}

void cmd_synth(const SynthOptions& o, std::ostream& log) {
  const SyntheticData data = generate_synthetic(o.spec);
  std::vector<std::string> codes;
  for (Index i = 0; i < o.spec.stations; ++i) codes.push_back(std::to_string(i + 1));
  const SnapshotArchive archive{data.series, StationDictionary::from_codes(codes), {}};
  save_archive(o.out, archive, format_of(o.text));

  const fs::path truth = o.out / "truth";
  ensure_dir(truth);
  const auto fmt = format_of(o.text);
  matrix_io::save(truth / ("mixing_before" + ext_of(o.text)), data.mixing_before, fmt);
  matrix_io::save(truth / ("mixing_after" + ext_of(o.text)), data.mixing_after, fmt);
  matrix_io::save(truth / ("latent_before" + ext_of(o.text)), data.latent_before, fmt);
  matrix_io::save(truth / ("latent_after" + ext_of(o.text)), data.latent_after, fmt);
  matrix_io::save(truth / ("clean_od" + ext_of(o.text)), data.clean.od, fmt);
  log << "synth: stations=" << o.spec.stations << " days=" << o.spec.days
      << " intervals_per_day=" << o.spec.intervals_per_day << " rank=" << o.spec.rank
      << " seed=" << o.spec.seed << "\n";
}

}  // namespace hwdmd::cli
