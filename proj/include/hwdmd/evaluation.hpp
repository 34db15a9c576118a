#pragma once

#include <span>
#include <vector>

#include "hwdmd/estimator.hpp"
#include "hwdmd/online.hpp"
#include "hwdmd/snapshot_store.hpp"
#include "hwdmd/types.hpp"

namespace hwdmd {

/// RMSE, WMAPE (percent) and R^2 pooled over every element of a slice.
/// WMAPE is undefined when sum |actual| = 0 and R^2 when actual is constant;
/// the value is then NaN and the flag is false.
struct MetricReport {
  double rmse = 0.0;
  double wmape = 0.0;
  double r2 = 0.0;
  bool wmape_defined = true;
  bool r2_defined = true;
  Index count = 0;
};

MetricReport metrics(std::span<const double> actual, std::span<const double> predicted);
MetricReport metrics(const Matrix& actual, const Matrix& predicted);

/// Per-slot mean over the training days. Every horizon gets the same
/// prediction.
class HistoricalAverage {
 public:
  static HistoricalAverage fit(const SnapshotSeries& train);

  /// Prediction for global interval range [begin, end) of a series on the same
  /// day grid.
  Matrix predict_od(Index begin, Index end) const;
  Matrix predict_boarding(Index begin, Index end) const;

  const Matrix& od_profile() const { return od_profile_; }
  const Matrix& boarding_profile() const { return boarding_profile_; }

 private:
  Matrix od_profile_;        // n x d
  Matrix boarding_profile_;  // s x d
};

struct FlowReport {
  MetricReport od;
  MetricReport boarding;
};

/// Error of U_Y U_Y^T y against y over [begin, end): the floor that no
/// forecast confined to span(U_Y) can beat.
FlowReport low_rank_bound(const SnapshotSeries& series, Index begin, Index end,
                          const Matrix& basis_y);

/// Forecasts aligned by target interval: od[k] column j is the (k+1)-step
/// forecast of interval begin + j.
struct RollingForecast {
  Index begin = 0;
  Index end = 0;
  std::vector<Matrix> od;
  std::vector<Matrix> boarding;

  Index horizon() const { return static_cast<Index>(od.size()); }
};

/// Every target in [begin, end) at every horizon 1..L with a fixed model.
RollingForecast rolling_forecast(const Forecaster& forecaster, const SnapshotSeries& series,
                                 Index begin, Index end, Index horizon,
                                 Execution execution = Execution::parallel);

/// Same as rolling_forecast over service days [first_day, last_day), but the
/// model is updated online at the end of every day; an origin inside day D
/// uses the model that has absorbed days up to D-1.
RollingForecast online_rolling_forecast(HwDmdModel model, const SnapshotSeries& series,
                                        Index first_day, Index last_day, Index horizon,
                                        bool clamp = false,
                                        const online::UpdateOptions& options = {});

struct HorizonReport {
  Index horizon = 1;
  FlowReport flows;
};

std::vector<HorizonReport> evaluate(const RollingForecast& forecast, const SnapshotSeries& series);

/// HA prediction arranged like a rolling forecast (identical at every horizon).
RollingForecast historical_average_forecast(const HistoricalAverage& ha, Index begin, Index end,
                                            Index horizon, Index stations);

/// Zeroes negative OD values and recomputes boarding from the clamped OD.
RollingForecast clamped(const RollingForecast& forecast, Index stations);

struct SlotError {
  Index slot = 0;
  MetricReport od;
};

/// OD metrics per within-day slot for one horizon.
std::vector<SlotError> per_slot_breakdown(const Matrix& actual, const Matrix& predicted,
                                          Index first_interval, Index intervals_per_day);

struct MagnitudeBin {
  double lower = 0.0;  // inclusive
  double upper = 0.0;  // exclusive
  MetricReport od;
};

/// OD metrics grouped by actual flow with powers of two as boundaries:
/// [0, 1), [1, 2), [2, 4), ... up to the bin holding the largest flow. Empty
/// bins are omitted.
std::vector<MagnitudeBin> magnitude_breakdown(const Matrix& actual, const Matrix& predicted);

}  // namespace hwdmd
