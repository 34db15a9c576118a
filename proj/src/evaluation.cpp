#include "hwdmd/evaluation.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "hwdmd/error.hpp"
#include "hwdmd/kernels.hpp"

namespace hwdmd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MetricReport report_from(const kernels::ErrorSums& sums) {
  MetricReport r;
  r.count = sums.count;
  const auto n = static_cast<double>(sums.count);
  r.rmse = std::sqrt(sums.squared_error / n);
  if (sums.absolute_actual > 0.0) {
    r.wmape = 100.0 * sums.absolute_error / sums.absolute_actual;
  } else {
    r.wmape = kNaN;
    r.wmape_defined = false;
  }
  if (sums.squared_deviation > 0.0) {
    r.r2 = 1.0 - sums.squared_error / sums.squared_deviation;
  } else {
    r.r2 = kNaN;
    r.r2_defined = false;
  }
  return r;
}

std::span<const double> as_span(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

RollingForecast empty_forecast(Index begin, Index end, Index horizon, Index n, Index s) {
  RollingForecast out;
  out.begin = begin;
  out.end = end;
  out.od.assign(static_cast<std::size_t>(horizon), Matrix::Zero(n, end - begin));
  out.boarding.assign(static_cast<std::size_t>(horizon), Matrix::Zero(s, end - begin));
  return out;
}

void scatter(const ForecastBlock& block, RollingForecast& out) {
  for (Index k = 0; k < block.od.cols(); ++k) {
    const Index target = block.origin + k;
    if (target < out.begin || target >= out.end) continue;
    const auto h = static_cast<std::size_t>(k);
    out.od[h].col(target - out.begin) = block.od.col(k);
    out.boarding[h].col(target - out.begin) = block.boarding.col(k);
  }
}

void forecast_origins(const Forecaster& forecaster, const SnapshotSeries& series,
                      const Matrix& history, Index first_origin, Index last_origin,
                      Index horizon, RollingForecast& out, Execution execution) {
  if (execution == Execution::serial) {
    for (Index o = first_origin; o < last_origin; ++o) {
      scatter(forecaster.forecast(series, o, horizon, &history), out);
    }
    return;
  }
  // Each (origin, step) pair writes its own column, so origins are independent.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (Index o = first_origin; o < last_origin; ++o) {
    try {
      const ForecastBlock block = forecaster.forecast(series, o, horizon, &history);
      scatter(block, out);
    } catch (...) {
#pragma omp critical(hwdmd_rolling_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

MetricReport metrics(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw DataError("actual and predicted lengths differ (" + std::to_string(actual.size()) +
                    " vs " + std::to_string(predicted.size()) + ")");
  }
  if (actual.empty()) throw DataError("metrics need at least one element");
  return report_from(kernels::parallel::error_sums(actual, predicted));
}

MetricReport metrics(const Matrix& actual, const Matrix& predicted) {
  if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
    throw DataError("actual and predicted shapes differ");
  }
  return metrics(as_span(actual), as_span(predicted));
}

HistoricalAverage HistoricalAverage::fit(const SnapshotSeries& train) {
  const Index d = train.calendar.intervals_per_day;
  const Index days = train.length() / d;
  if (days < 1) throw DataError("historical average needs at least one training day");
  HistoricalAverage ha;
  ha.od_profile_ = Matrix::Zero(train.od_size(), d);
  for (Index day = 0; day < days; ++day) ha.od_profile_ += train.od.middleCols(day * d, d);
  ha.od_profile_ /= static_cast<double>(days);
  ha.boarding_profile_ = boarding_from_od(ha.od_profile_, train.stations);
  return ha;
}

Matrix HistoricalAverage::predict_od(Index begin, Index end) const {
  const Index d = od_profile_.cols();
  Matrix out(od_profile_.rows(), end - begin);
  for (Index t = begin; t < end; ++t) out.col(t - begin) = od_profile_.col(t % d);
  return out;
}

Matrix HistoricalAverage::predict_boarding(Index begin, Index end) const {
  const Index d = boarding_profile_.cols();
  Matrix out(boarding_profile_.rows(), end - begin);
  for (Index t = begin; t < end; ++t) out.col(t - begin) = boarding_profile_.col(t % d);
  return out;
}

FlowReport low_rank_bound(const SnapshotSeries& series, Index begin, Index end,
                          const Matrix& basis_y) {
  const Matrix actual = series.od.middleCols(begin, end - begin);
  const Matrix projected = basis_y * (basis_y.transpose() * actual);
  return {metrics(actual, projected),
          metrics(Matrix(series.boarding.middleCols(begin, end - begin)),
                  boarding_from_od(projected, series.stations))};
}

RollingForecast rolling_forecast(const Forecaster& forecaster, const SnapshotSeries& series,
                                 Index begin, Index end, Index horizon, Execution execution) {
  if (begin >= end || end > series.length()) throw ConfigError("invalid forecast target range");
  RollingForecast out = empty_forecast(begin, end, horizon, series.od_size(), series.stations);
  const Matrix history = forecaster.project(series);
  forecast_origins(forecaster, series, history, begin - horizon + 1, end, horizon, out,
                   execution);
  return out;
}

RollingForecast online_rolling_forecast(HwDmdModel model, const SnapshotSeries& series,
                                        Index first_day, Index last_day, Index horizon,
                                        bool clamp, const online::UpdateOptions& options) {
  const Index d = series.calendar.intervals_per_day;
  const Index begin = first_day * d;
  const Index end = last_day * d;
  if (begin >= end || end > series.length()) throw ConfigError("invalid forecast day range");
  RollingForecast out = empty_forecast(begin, end, horizon, series.od_size(), series.stations);
  for (Index day = first_day; day < last_day; ++day) {
    const Forecaster forecaster(model, clamp);
    const Matrix history = forecaster.project(series);
    const Index first_origin = day == first_day ? begin - horizon + 1 : day * d;
    forecast_origins(forecaster, series, history, first_origin, (day + 1) * d, horizon, out,
                     Execution::parallel);
    if (day + 1 < last_day) {
      online::daily_update(model, daily_batch(series, model.hyper.lags, day), options);
    }
  }
  return out;
}

std::vector<HorizonReport> evaluate(const RollingForecast& forecast,
                                    const SnapshotSeries& series) {
  const Index count = forecast.end - forecast.begin;
  const Matrix od = series.od.middleCols(forecast.begin, count);
  const Matrix boarding = series.boarding.middleCols(forecast.begin, count);
  std::vector<HorizonReport> out;
  for (Index k = 0; k < forecast.horizon(); ++k) {
    const auto h = static_cast<std::size_t>(k);
    out.push_back({k + 1, {metrics(od, forecast.od[h]), metrics(boarding, forecast.boarding[h])}});
  }
  return out;
}

RollingForecast historical_average_forecast(const HistoricalAverage& ha, Index begin, Index end,
                                            Index horizon, Index stations) {
  RollingForecast out;
  out.begin = begin;
  out.end = end;
  const Matrix od = ha.predict_od(begin, end);
  const Matrix boarding = boarding_from_od(od, stations);
  out.od.assign(static_cast<std::size_t>(horizon), od);
  out.boarding.assign(static_cast<std::size_t>(horizon), boarding);
  return out;
}

RollingForecast clamped(const RollingForecast& forecast, Index stations) {
  RollingForecast out = forecast;
  for (std::size_t k = 0; k < out.od.size(); ++k) {
    out.od[k] = out.od[k].cwiseMax(0.0);
    out.boarding[k] = boarding_from_od(out.od[k], stations);
  }
  return out;
}

std::vector<SlotError> per_slot_breakdown(const Matrix& actual, const Matrix& predicted,
                                          Index first_interval, Index intervals_per_day) {
  std::vector<SlotError> out;
  for (Index slot = 0; slot < intervals_per_day; ++slot) {
    std::vector<Index> cols;
    for (Index j = 0; j < actual.cols(); ++j) {
      if ((first_interval + j) % intervals_per_day == slot) cols.push_back(j);
    }
    if (cols.empty()) continue;
    Matrix a(actual.rows(), static_cast<Index>(cols.size()));
    Matrix p(actual.rows(), a.cols());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      a.col(static_cast<Index>(c)) = actual.col(cols[c]);
      p.col(static_cast<Index>(c)) = predicted.col(cols[c]);
    }
    out.push_back({slot, metrics(a, p)});
  }
  return out;
}

std::vector<MagnitudeBin> magnitude_breakdown(const Matrix& actual, const Matrix& predicted) {
  std::vector<MagnitudeBin> out;
  if (actual.size() == 0) return out;
  const double largest = actual.maxCoeff();
  double lower = 0.0;
  double upper = 1.0;
  while (true) {
    std::vector<double> a;
    std::vector<double> p;
    for (Index i = 0; i < actual.size(); ++i) {
      const double v = actual.data()[i];
      const bool in_bin = (lower == 0.0 ? v < upper : v >= lower && v < upper);
      if (in_bin) {
        a.push_back(v);
        p.push_back(predicted.data()[i]);
      }
    }
    if (!a.empty()) out.push_back({lower, upper, metrics(a, p)});
    if (largest < upper) break;
    lower = upper;
    upper *= 2.0;
  }
  return out;
}

}  // namespace hwdmd
