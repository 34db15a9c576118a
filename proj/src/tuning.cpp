#include "hwdmd/tuning.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <memory>

#include "hwdmd/error.hpp"
#include "hwdmd/evaluation.hpp"

namespace hwdmd {

namespace {

std::vector<double> score_all(const HyperScorer& scorer, const std::vector<HwDmdHyper>& points,
                              Execution execution) {
  std::vector<double> scores(points.size());
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < points.size(); ++i) scores[i] = scorer(points[i]);
    return scores;
  }
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      scores[static_cast<std::size_t>(i)] = scorer(points[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(hwdmd_tuning_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return scores;
}

std::size_t first_minimum(const std::vector<double>& scores) {
  return static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) -
                                  scores.begin());
}

TuneStep step_of(const HwDmdHyper& h, double rmse) {
  return {h.lags.od_lags, h.rank_x, h.rank_y, h.rho, rmse, false};
}

}  // namespace

SearchGrids SearchGrids::defaults() {
  SearchGrids grids;
  for (Index r = 20; r <= 100; r += 10) {
    grids.rank_x.push_back(r);
    grids.rank_y.push_back(r);
  }
  for (int k = 80; k <= 100; ++k) grids.rho.push_back(k / 100.0);
  return grids;
}

HyperScorer validation_scorer(const SnapshotSeries& series, Index train_days,
                              Index validation_begin, Index validation_end) {
  if (!(0 < train_days && train_days <= validation_begin && validation_begin < validation_end &&
        validation_end <= series.calendar.day_count())) {
    throw ConfigError("training and validation days must be ordered and disjoint");
  }
  auto train = std::make_shared<const SnapshotSeries>(series.days(0, train_days));
  auto full = std::make_shared<const SnapshotSeries>(series.days(0, validation_end));
  const Index d = series.calendar.intervals_per_day;
  return [train, full, d, validation_begin, validation_end](HwDmdHyper hyper) {
    // Early lag-search points have fewer input rows than the requested r_X.
    const Index stations = train->stations;
    hyper.rank_x = std::min(hyper.rank_x, hyper.lags.input_size(stations));
    hyper.rank_y = std::min(hyper.rank_y, stations * stations);
    const Forecaster forecaster(fit(*train, hyper));
    const RollingForecast fc = rolling_forecast(forecaster, *full, validation_begin * d,
                                                validation_end * d, 1, Execution::serial);
    return evaluate(fc, *full).front().flows.od.rmse;
  };
}

TuneResult greedy_lag_search(const HyperScorer& scorer, const HwDmdHyper& base,
                             const std::vector<Index>& candidates, Index max_lags,
                             Execution execution) {
  if (candidates.empty()) throw ConfigError("greedy lag search needs at least one candidate lag");
  if (max_lags < 1) throw ConfigError("max_lags must be >= 1");

  TuneResult result;
  result.hyper = base;
  result.rmse = std::numeric_limits<double>::infinity();
  std::vector<Index> selected;

  while (static_cast<Index>(selected.size()) < max_lags) {
    std::vector<HwDmdHyper> points;
    for (const Index lag : candidates) {
      if (std::find(selected.begin(), selected.end(), lag) != selected.end()) continue;
      std::vector<Index> lags = selected;
      lags.push_back(lag);
      std::sort(lags.begin(), lags.end());
      HwDmdHyper h = base;
      h.lags = LagSpec::make(std::move(lags));
      points.push_back(std::move(h));
    }
    if (points.empty()) break;

    const std::vector<double> scores = score_all(scorer, points, execution);
    const std::size_t best = first_minimum(scores);
    const bool improves = scores[best] < result.rmse;
    for (std::size_t i = 0; i < points.size(); ++i) {
      TuneStep step = step_of(points[i], scores[i]);
      step.accepted = improves && i == best;
      result.trace.push_back(std::move(step));
    }
    if (!improves) break;
    result.rmse = scores[best];
    result.hyper = points[best];
    selected = result.hyper.lags.od_lags;
  }
  if (selected.empty()) throw NumericError("no candidate lag produced a finite validation error");
  return result;
}

TuneResult rank_and_rho_search(const HyperScorer& scorer, const HwDmdHyper& base, Index stations,
                               const SearchGrids& grids, Execution execution) {
  if (grids.rank_x.empty() || grids.rank_y.empty()) throw ConfigError("rank grids are empty");
  const Index n = stations * stations;
  const Index rows = base.lags.input_size(stations);

  std::vector<HwDmdHyper> points;
  for (const Index rx : grids.rank_x) {
    for (const Index ry : grids.rank_y) {
      if (rx < 1 || ry < 1 || rx > rows || ry > n) continue;
      HwDmdHyper h = base;
      h.rank_x = rx;
      h.rank_y = ry;
      points.push_back(std::move(h));
    }
  }
  if (points.empty()) throw ConfigError("no rank grid point fits the data dimensions");

  TuneResult result;
  const std::vector<double> scores = score_all(scorer, points, execution);
  const std::size_t best = first_minimum(scores);
  for (std::size_t i = 0; i < points.size(); ++i) {
    TuneStep step = step_of(points[i], scores[i]);
    step.accepted = i == best;
    result.trace.push_back(std::move(step));
  }
  result.hyper = points[best];
  result.rmse = scores[best];

  if (!grids.rho.empty()) {
    std::vector<HwDmdHyper> rho_points;
    for (const double rho : grids.rho) {
      HwDmdHyper h = result.hyper;
      h.rho = rho;
      rho_points.push_back(std::move(h));
    }
    const std::vector<double> rho_scores = score_all(scorer, rho_points, execution);
    const std::size_t best_rho = first_minimum(rho_scores);
    for (std::size_t i = 0; i < rho_points.size(); ++i) {
      TuneStep step = step_of(rho_points[i], rho_scores[i]);
      step.accepted = i == best_rho;
      result.trace.push_back(std::move(step));
    }
    result.hyper = rho_points[best_rho];
    result.rmse = rho_scores[best_rho];
  }
  return result;
}

}  // namespace hwdmd
