#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.
// Oracles deliberately avoid the library's own linear algebra helpers.

#include <Eigen/Dense>
#include <Eigen/QR>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hwdmd/calendar.hpp"
#include "hwdmd/regression.hpp"
#include "hwdmd/snapshot_store.hpp"

namespace hwdmd::test {

inline Calendar weekday_calendar(Index days, Index intervals_per_day, int interval_minutes = 30) {
  using namespace std::chrono;
  Calendar cal;
  cal.interval_minutes = interval_minutes;
  cal.intervals_per_day = intervals_per_day;
  cal.day_start_minute = 6 * 60;
  sys_days day = sys_days{year{2019} / January / 7};
  while (static_cast<Index>(cal.service_days.size()) < days) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) cal.service_days.push_back(day);
    day += std::chrono::days{1};
  }
  return cal;
}

/// Series over `od` (n x T, T a multiple of d) with boarding as row sums.
inline SnapshotSeries series_of(const Matrix& od, Index stations, Index intervals_per_day) {
  SnapshotSeries s;
  s.stations = stations;
  s.od = od;
  s.boarding = Matrix::Zero(stations, od.cols());
  for (Index t = 0; t < od.cols(); ++t) {
    for (Index j = 0; j < stations; ++j) {
      for (Index i = 0; i < stations; ++i) s.boarding(i, t) += od(j * stations + i, t);
    }
  }
  s.calendar = weekday_calendar(od.cols() / intervals_per_day, intervals_per_day);
  return s;
}

/// Random non-negative integer counts with zero diagonal.
inline SnapshotSeries random_series(Index stations, Index intervals_per_day, Index days,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(0, 9);
  const Index n = stations * stations;
  Matrix od = Matrix::Zero(n, days * intervals_per_day);
  for (Index t = 0; t < od.cols(); ++t) {
    for (Index j = 0; j < stations; ++j) {
      for (Index i = 0; i < stations; ++i) {
        if (i != j) od(j * stations + i, t) = count(rng);
      }
    }
  }
  return series_of(od, stations, intervals_per_day);
}

inline Matrix pinv_oracle(const Matrix& a) {
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(a).pseudoInverse();
}

/// Brute-force regression pair: re-reads the series column by column.
inline void regression_oracle(const SnapshotSeries& series, const LagSpec& lags, Index end,
                              Index first_target, double rho, Matrix& targets, Matrix& inputs) {
  const Index n = series.od_size();
  const Index s = series.stations;
  const Index h = lags.order();
  const Index start = std::max(first_target, lags.max_lag());
  const Index m = end - start;
  targets.resize(n, m);
  inputs.resize(h * n + 2 * s, m);
  const Index last_day = series.calendar.day_of(end - 1);
  for (Index c = 0; c < m; ++c) {
    const Index t = start + c;
    const double w = std::pow(std::sqrt(rho), static_cast<double>(last_day - series.calendar.day_of(t)));
    for (Index r = 0; r < n; ++r) targets(r, c) = w * series.od(r, t);
    for (Index k = 0; k < h; ++k) {
      for (Index r = 0; r < n; ++r) inputs(k * n + r, c) = w * series.od(r, t - lags.od_lags[k]);
    }
    for (Index r = 0; r < s; ++r) {
      inputs(h * n + r, c) = w * series.boarding(r, t - 1);
      inputs(h * n + s + r, c) = w * series.boarding(r, t - 2);
    }
  }
}

/// Full-space recursion with operator G (n x (h n + 2 s)) under the same
/// availability rules as the reduced forecaster: OD observed before origin-2,
/// boarding observed before origin, later values replaced by forecasts. OD lags
/// are read through `project` (use U_Y U_Y^T to mirror the reduced model, or
/// the identity).
inline Matrix full_forecast_oracle(const Matrix& G, const Matrix& project,
                                   const SnapshotSeries& series, const LagSpec& lags,
                                   Index origin, Index horizon) {
  const Index n = series.od_size();
  const Index s = series.stations;
  const Index h = lags.order();
  const Index low = origin - 2 - lags.max_lag();
  const Index high = origin + horizon;
  Matrix od(n, high - low);
  Matrix board(s, high - low);
  auto rowsum = [&](const Vector& v) {
    Vector b = Vector::Zero(s);
    for (Index j = 0; j < s; ++j) b += v.segment(j * s, s);
    return b;
  };
  for (Index t = low; t < high; ++t) {
    const Index c = t - low;
    if (t < origin - 2) {
      od.col(c) = project * series.od.col(t);
    } else {
      Vector x(h * n + 2 * s);
      for (Index k = 0; k < h; ++k) x.segment(k * n, n) = od.col(c - lags.od_lags[k]);
      x.segment(h * n, s) = t - 1 < origin ? Vector(series.boarding.col(t - 1)) : Vector(board.col(c - 1));
      x.segment(h * n + s, s) =
          t - 2 < origin ? Vector(series.boarding.col(t - 2)) : Vector(board.col(c - 2));
      od.col(c) = G * x;
    }
    board.col(c) = rowsum(od.col(c));
  }
  return od.rightCols(horizon);
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("hwdmd_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace hwdmd::test
