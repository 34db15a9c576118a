#pragma once

#include <vector>

#include "hwdmd/regression.hpp"
#include "hwdmd/snapshot_store.hpp"
#include "hwdmd/types.hpp"

namespace hwdmd {

struct HwDmdHyper {
  LagSpec lags;
  Index rank_x = 100;
  Index rank_y = 50;
  double rho = 1.0;

  /// Throws ConfigError when a rank is < 1 or exceeds the row dimension it
  /// truncates, or rho is outside (0, 1].
  void validate(Index stations) const;
};

/// Reduced HW-DMD state: projection bases U_X, U_Y and the core matrices
///   P = Yt Xt^T,  Q_X = Xt Xt^T,  Q_Y = Yt Yt^T,
/// where Xt = U_X^T X^w and Yt = U_Y^T Y^w. Batch fits and online updates both
/// produce this form and share one forecasting path.
struct HwDmdModel {
  HwDmdHyper hyper;
  Index stations = 0;
  Index intervals_per_day = 0;
  Matrix basis_x;  // (h n + 2 s) x w_x
  Matrix basis_y;  // n x w_y
  Matrix cross;    // w_y x w_x
  Matrix gram_x;   // w_x x w_x
  Matrix gram_y;   // w_y x w_y

  Index od_size() const { return stations * stations; }
  Index input_size() const { return hyper.lags.input_size(stations); }
  Index width_x() const { return basis_x.cols(); }
  Index width_y() const { return basis_y.cols(); }

  /// Zero-width model; the first daily update turns it into a fitted one.
  static HwDmdModel empty(const HwDmdHyper& hyper, Index stations, Index intervals_per_day);
};

/// Training window inside a series: targets in [max(first_target, q_h), end).
/// `end < 0` means the whole series.
struct FitWindow {
  Index first_target = 0;
  Index end = -1;
};

/// Weighted batch fit. The bases come from rank-r_X / rank-r_Y truncated SVDs
/// of X^w and Y^w (fewer columns when X^w or Y^w has fewer than r columns).
HwDmdModel fit(const SnapshotSeries& series, const HwDmdHyper& hyper, FitWindow window = {});

/// A~_i (r_Y x r_Y) for each OD lag and A~_b1, A~_b2 (r_Y x s).
struct ReducedCoefficients {
  std::vector<Matrix> od;
  Matrix boarding_lag1;
  Matrix boarding_lag2;
  /// Non-zero eigenvalues of Q_X dropped by the pseudo-inverse tolerance.
  Index pinv_discarded = 0;
};

/// A~_i = P Q_X^+ U_{X,i}^T U_Y and A~_bj = P Q_X^+ U_{X,bj}^T.
ReducedCoefficients reduced_coefficients(const HwDmdModel& model);

/// Forecasts for intervals origin, origin+1, ..., origin+L-1 (column k is the
/// (k+1)-step forecast).
struct ForecastBlock {
  Index origin = 0;
  Matrix od;        // n x L
  Matrix boarding;  // s x L, row sums of `od`
};

/// Multi-step forecaster in the reduced subspace.
///
/// At origin t the boarding snapshots of intervals [0, t) are observed, while
/// OD snapshots are observed only for [0, t-2); the last two are still in
/// progress. Any OD snapshot the recursion needs from t-2 onward is replaced by
/// the model's own forecast, and any boarding snapshot from t onward by the
/// row sums of the forecasted OD snapshot. Forecasts use raw (unweighted)
/// snapshots.
class Forecaster {
 public:
  explicit Forecaster(const HwDmdModel& model, bool clamp = false);

  /// `reduced_history`, if given, must be U_Y^T series.od (see project()).
  ForecastBlock forecast(const SnapshotSeries& series, Index origin, Index horizon,
                         const Matrix* reduced_history = nullptr) const;

  /// U_Y^T of every OD snapshot in the series.
  Matrix project(const SnapshotSeries& series) const;

  const ReducedCoefficients& coefficients() const { return coefficients_; }
  const Matrix& basis_y() const { return basis_y_; }
  const LagSpec& lags() const { return lags_; }
  bool clamps() const { return clamp_; }

 private:
  LagSpec lags_;
  Index stations_ = 0;
  Matrix basis_y_;
  ReducedCoefficients coefficients_;
  bool clamp_ = false;
};

ForecastBlock forecast(const HwDmdModel& model, const SnapshotSeries& series, Index origin,
                       Index horizon, bool clamp = false);

}  // namespace hwdmd
