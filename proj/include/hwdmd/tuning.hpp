#pragma once

#include <functional>
#include <vector>

#include "hwdmd/estimator.hpp"
#include "hwdmd/snapshot_store.hpp"

namespace hwdmd {

/// Validation error (lower is better) of a hyperparameter set. Scorers are
/// called concurrently and must be thread-safe.
using HyperScorer = std::function<double(const HwDmdHyper&)>;

struct TuneStep {
  std::vector<Index> lags;
  Index rank_x = 0;
  Index rank_y = 0;
  double rho = 1.0;
  double rmse = 0.0;
  bool accepted = false;
};

struct TuneResult {
  HwDmdHyper hyper;
  double rmse = 0.0;
  std::vector<TuneStep> trace;
};

struct SearchGrids {
  std::vector<Index> rank_x;
  std::vector<Index> rank_y;
  std::vector<double> rho;

  /// Ranks 20, 30, ..., 100 and rho 0.80, 0.81, ..., 1.00.
  static SearchGrids defaults();
};

/// One-step OD RMSE over service days [validation_begin, validation_end) of
/// `series` for a model fitted on days [0, train_days). The fit and the
/// forecasts use only data available at each origin.
HyperScorer validation_scorer(const SnapshotSeries& series, Index train_days,
                              Index validation_begin, Index validation_end);

/// Greedy forward selection: each round adds the candidate lag with the lowest
/// score; stops when no candidate improves or `max_lags` is reached.
TuneResult greedy_lag_search(const HyperScorer& scorer, const HwDmdHyper& base,
                             const std::vector<Index>& candidates, Index max_lags = 10,
                             Execution execution = Execution::parallel);

/// (r_X, r_Y) grid at base.rho, then a line search over rho at the best ranks.
/// Grid points whose ranks exceed the matrix dimensions are skipped.
TuneResult rank_and_rho_search(const HyperScorer& scorer, const HwDmdHyper& base, Index stations,
                               const SearchGrids& grids,
                               Execution execution = Execution::parallel);

}  // namespace hwdmd
