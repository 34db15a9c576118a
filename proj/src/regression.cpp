#include "hwdmd/regression.hpp"

#include <cmath>
#include <sstream>

#include "hwdmd/error.hpp"
#include "hwdmd/kernels.hpp"

namespace hwdmd {

LagSpec LagSpec::make(std::vector<Index> od_lags) {
  LagSpec spec{std::move(od_lags)};
  spec.validate();
  return spec;
}

LagSpec LagSpec::parse(const std::string& text) {
  std::vector<Index> lags;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("invalid lag '" + item + "'");
    lags.push_back(static_cast<Index>(value));
  }
  return make(std::move(lags));
}

void LagSpec::validate() const {
  if (od_lags.empty()) throw ConfigError("at least one OD lag is required");
  if (od_lags.front() < kMinOdLag) {
    throw ConfigError("OD lag " + std::to_string(od_lags.front()) +
                      " is not observable; OD lags must be >= 3");
  }
  for (std::size_t i = 1; i < od_lags.size(); ++i) {
    if (od_lags[i] <= od_lags[i - 1]) throw ConfigError("OD lags must be strictly increasing");
  }
}

std::string LagSpec::to_string() const {
  std::string out;
  for (const Index lag : od_lags) {
    if (!out.empty()) out += ',';
    out += std::to_string(lag);
  }
  return out;
}

void validate_forgetting_ratio(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw ConfigError("forgetting ratio must lie in (0, 1], got " + std::to_string(rho));
  }
}

std::vector<double> column_weights(const std::vector<Index>& column_day, double rho) {
  validate_forgetting_ratio(rho);
  std::vector<double> weights(column_day.size(), 1.0);
  if (column_day.empty() || rho == 1.0) return weights;
  const double sigma = std::sqrt(rho);
  const Index last = column_day.back();
  for (std::size_t j = 0; j < column_day.size(); ++j) {
    weights[j] = std::pow(sigma, static_cast<double>(last - column_day[j]));
  }
  return weights;
}

namespace {

struct Columns {
  std::vector<Index> intervals;
  std::vector<Index> days;
};

Columns plan_columns(const SnapshotSeries& series, const LagSpec& lags, Index end,
                     Index first_target) {
  lags.validate();
  if (end > series.length()) {
    throw ConfigError("end interval " + std::to_string(end) + " beyond series length " +
                      std::to_string(series.length()));
  }
  if (end <= lags.max_lag()) {
    throw ConfigError("end interval " + std::to_string(end) + " does not exceed OD lag " +
                      std::to_string(lags.max_lag()));
  }
  const Index begin = std::max(first_target, lags.max_lag());
  if (begin >= end) {
    throw DataError("no target columns in [" + std::to_string(begin) + ", " +
                    std::to_string(end) + ")");
  }
  Columns cols;
  for (Index t = begin; t < end; ++t) {
    cols.intervals.push_back(t);
    cols.days.push_back(series.calendar.day_of(t));
  }
  return cols;
}

RegressionPair assemble(const SnapshotSeries& series, const LagSpec& lags, Columns cols,
                        std::span<const double> scale) {
  RegressionPair pair;
  kernels::AssemblyPlan plan{lags.od_lags, cols.intervals, scale};
  kernels::parallel::assemble_regression(series.od, series.boarding, plan, pair.inputs,
                                         pair.targets);
  pair.target_intervals = std::move(cols.intervals);
  pair.column_day = std::move(cols.days);
  return pair;
}

}  // namespace

RegressionPair build_pair(const SnapshotSeries& series, const LagSpec& lags, Index end,
                          Index first_target) {
  return assemble(series, lags, plan_columns(series, lags, end, first_target), {});
}

RegressionPair apply_weights(const RegressionPair& pair, double rho) {
  const std::vector<double> w = column_weights(pair.column_day, rho);
  RegressionPair out = pair;
  for (Index j = 0; j < out.columns(); ++j) {
    const double wj = w[static_cast<std::size_t>(j)];
    out.targets.col(j) *= wj;
    out.inputs.col(j) *= wj;
  }
  return out;
}

RegressionPair build_weighted_pair(const SnapshotSeries& series, const LagSpec& lags, Index end,
                                   Index first_target, double rho) {
  Columns cols = plan_columns(series, lags, end, first_target);
  const std::vector<double> w = column_weights(cols.days, rho);
  return assemble(series, lags, std::move(cols), w);
}

DailyBatch daily_batch(const SnapshotSeries& series, const LagSpec& lags, Index day) {
  const Calendar& cal = series.calendar;
  if (day < 0 || day >= cal.day_count()) {
    throw ConfigError("day " + std::to_string(day) + " outside series");
  }
  const Index first = cal.first_interval_of_day(day);
  if (first < lags.max_lag()) {
    throw DataError("day " + std::to_string(day) + " lacks " + std::to_string(lags.max_lag()) +
                    " intervals of lag history");
  }
  RegressionPair pair = build_pair(series, lags, first + cal.intervals_per_day, first);
  return {std::move(pair.targets), std::move(pair.inputs)};
}

}  // namespace hwdmd
