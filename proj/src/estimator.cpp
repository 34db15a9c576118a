#include "hwdmd/estimator.hpp"

#include <functional>
#include <optional>
#include <string>

#include "hwdmd/error.hpp"
#include "hwdmd/linalg.hpp"

namespace hwdmd {

void HwDmdHyper::validate(Index stations) const {
  lags.validate();
  validate_forgetting_ratio(rho);
  const Index n = stations * stations;
  const Index rows = lags.input_size(stations);
  if (rank_y < 1 || rank_y > n) {
    throw ConfigError("r_Y = " + std::to_string(rank_y) + " outside [1, " + std::to_string(n) +
                      "]");
  }
  if (rank_x < 1 || rank_x > rows) {
    throw ConfigError("r_X = " + std::to_string(rank_x) + " outside [1, " +
                      std::to_string(rows) + "]");
  }
}

HwDmdModel HwDmdModel::empty(const HwDmdHyper& hyper, Index stations, Index intervals_per_day) {
  hyper.validate(stations);
  HwDmdModel model;
  model.hyper = hyper;
  model.stations = stations;
  model.intervals_per_day = intervals_per_day;
  model.basis_x.resize(model.input_size(), 0);
  model.basis_y.resize(model.od_size(), 0);
  model.cross.resize(0, 0);
  model.gram_x.resize(0, 0);
  model.gram_y.resize(0, 0);
  return model;
}

HwDmdModel fit(const SnapshotSeries& series, const HwDmdHyper& hyper, FitWindow window) {
  hyper.validate(series.stations);
  const Index end = window.end < 0 ? series.length() : window.end;
  const RegressionPair weighted =
      build_weighted_pair(series, hyper.lags, end, window.first_target, hyper.rho);

  const linalg::TruncatedSvd svd_x = linalg::truncated_svd(weighted.inputs, hyper.rank_x);
  const linalg::TruncatedSvd svd_y = linalg::truncated_svd(weighted.targets, hyper.rank_y);

  // U^T W = Sigma V^T for the kept singular vectors.
  const Matrix reduced_x = svd_x.singular_values.asDiagonal() * svd_x.right.transpose();
  const Matrix reduced_y = svd_y.singular_values.asDiagonal() * svd_y.right.transpose();

  HwDmdModel model;
  model.hyper = hyper;
  model.stations = series.stations;
  model.intervals_per_day = series.calendar.intervals_per_day;
  model.basis_x = svd_x.left;
  model.basis_y = svd_y.left;
  model.cross = reduced_y * reduced_x.transpose();
  model.gram_x = svd_x.singular_values.array().square().matrix().asDiagonal();
  model.gram_y = svd_y.singular_values.array().square().matrix().asDiagonal();
  return model;
}

ReducedCoefficients reduced_coefficients(const HwDmdModel& model) {
  const Index n = model.od_size();
  const Index s = model.stations;
  const Index h = model.hyper.lags.order();
  if (model.basis_x.rows() != model.input_size() || model.basis_y.rows() != n ||
      model.cross.rows() != model.width_y() || model.cross.cols() != model.width_x() ||
      model.gram_x.rows() != model.width_x()) {
    throw NumericError("model matrices have inconsistent dimensions");
  }

  ReducedCoefficients out;
  const Matrix cross_pinv = model.cross * linalg::symmetric_pinv(model.gram_x, &out.pinv_discarded);
  out.od.reserve(static_cast<std::size_t>(h));
  for (Index k = 0; k < h; ++k) {
    out.od.push_back(cross_pinv *
                     (model.basis_x.middleRows(k * n, n).transpose() * model.basis_y));
  }
  out.boarding_lag1 = cross_pinv * model.basis_x.middleRows(h * n, s).transpose();
  out.boarding_lag2 = cross_pinv * model.basis_x.middleRows(h * n + s, s).transpose();
  return out;
}

Forecaster::Forecaster(const HwDmdModel& model, bool clamp)
    : lags_(model.hyper.lags),
      stations_(model.stations),
      basis_y_(model.basis_y),
      coefficients_(reduced_coefficients(model)),
      clamp_(clamp) {}

Matrix Forecaster::project(const SnapshotSeries& series) const {
  return basis_y_.transpose() * series.od;
}

ForecastBlock Forecaster::forecast(const SnapshotSeries& series, Index origin, Index horizon,
                                   const Matrix* reduced_history) const {
  if (horizon < 1) throw ConfigError("forecast horizon must be >= 1");
  if (origin > series.length()) {
    throw DataError("origin " + std::to_string(origin) + " beyond the observed series");
  }
  if (series.stations != stations_) throw DataError("series and model station counts differ");

  // OD snapshots from observed_end on are still in progress at the origin.
  const Index observed_end = origin - 2;
  const Index width = basis_y_.cols();
  const Index s = stations_;

  // Memo over [low, origin + horizon); low covers the deepest nowcast lag.
  const Index low = observed_end - lags_.max_lag();
  std::vector<std::optional<Vector>> reduced(static_cast<std::size_t>(origin + horizon - low));
  std::vector<std::optional<Vector>> board(reduced.size());

  std::function<const Vector&(Index)> reduced_at;
  std::function<Vector(Index)> boarding_at;

  auto forecast_od = [&](Index j) -> Vector {
    Vector od = basis_y_ * reduced_at(j);
    if (clamp_) od = od.cwiseMax(0.0);
    return od;
  };

  reduced_at = [&](Index j) -> const Vector& {
    if (j < 0) {
      throw DataError("origin " + std::to_string(origin) + " needs OD history before interval 0");
    }
    auto& slot = reduced[static_cast<std::size_t>(j - low)];
    if (slot) return *slot;
    if (j < observed_end) {
      slot = reduced_history ? Vector(reduced_history->col(j))
                             : Vector(basis_y_.transpose() * series.od.col(j));
      return *slot;
    }
    Vector y = Vector::Zero(width);
    for (std::size_t k = 0; k < lags_.od_lags.size(); ++k) {
      y.noalias() += coefficients_.od[k] * reduced_at(j - lags_.od_lags[k]);
    }
    y.noalias() += coefficients_.boarding_lag1 * boarding_at(j - 1);
    y.noalias() += coefficients_.boarding_lag2 * boarding_at(j - 2);
    slot = std::move(y);
    return *slot;
  };

  boarding_at = [&](Index j) -> Vector {
    if (j < 0) throw DataError("origin needs boarding history before interval 0");
    if (j < origin) return series.boarding.col(j);
    auto& slot = board[static_cast<std::size_t>(j - low)];
    if (!slot) slot = boarding_from_od(forecast_od(j), s).col(0);
    return *slot;
  };

  ForecastBlock block;
  block.origin = origin;
  block.od.resize(basis_y_.rows(), horizon);
  for (Index k = 0; k < horizon; ++k) block.od.col(k) = forecast_od(origin + k);
  block.boarding = boarding_from_od(block.od, s);
  return block;
}

ForecastBlock forecast(const HwDmdModel& model, const SnapshotSeries& series, Index origin,
                       Index horizon, bool clamp) {
  return Forecaster(model, clamp).forecast(series, origin, horizon);
}

}  // namespace hwdmd
