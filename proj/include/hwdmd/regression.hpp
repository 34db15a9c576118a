#pragma once

#include <array>
#include <string>
#include <vector>

#include "hwdmd/snapshot_store.hpp"
#include "hwdmd/types.hpp"

namespace hwdmd {

/// OD lags q_1 < ... < q_h (q_1 >= 3) plus the fixed boarding lags {1, 2}.
struct LagSpec {
  std::vector<Index> od_lags;

  static constexpr std::array<Index, 2> boarding_lags{1, 2};

  /// Validates and returns; throws ConfigError for an empty, unsorted or
  /// too-recent lag list.
  static LagSpec make(std::vector<Index> od_lags);
  /// Parses "3,4,8,14".
  static LagSpec parse(const std::string& text);

  void validate() const;
  Index order() const { return static_cast<Index>(od_lags.size()); }
  Index max_lag() const { return od_lags.back(); }
  /// Rows of the augmented input: h*n + 2*s.
  Index input_size(Index stations) const {
    return order() * stations * stations + 2 * stations;
  }
  std::string to_string() const;

  friend bool operator==(const LagSpec&, const LagSpec&) = default;
};

/// Target matrix Y and augmented input X with one column per target interval,
/// oldest first. Row blocks of X: OD lags ascending, boarding lag 1, boarding
/// lag 2.
struct RegressionPair {
  Matrix targets;
  Matrix inputs;
  std::vector<Index> target_intervals;
  std::vector<Index> column_day;

  Index columns() const { return targets.cols(); }
};

/// Columns for target intervals [max(first_target, q_h), end). With the
/// default first_target this is the m = end - q_h columns of the full history.
RegressionPair build_pair(const SnapshotSeries& series, const LagSpec& lags, Index end,
                          Index first_target = 0);

/// sqrt(rho)^(day(last) - day(j)) for each column; throws ConfigError unless
/// 0 < rho <= 1.
std::vector<double> column_weights(const std::vector<Index>& column_day, double rho);

/// Scales every column of both matrices by its column weight.
RegressionPair apply_weights(const RegressionPair& pair, double rho);

/// Same result as apply_weights(build_pair(...), rho) without the unweighted
/// intermediate copy.
RegressionPair build_weighted_pair(const SnapshotSeries& series, const LagSpec& lags, Index end,
                                   Index first_target, double rho);

void validate_forgetting_ratio(double rho);

/// One service day of aligned targets and inputs, d columns.
struct DailyBatch {
  Matrix targets;
  Matrix inputs;
};

/// The batch for service day `day`. Every target of that day must have its
/// full lag history inside the series.
DailyBatch daily_batch(const SnapshotSeries& series, const LagSpec& lags, Index day);

}  // namespace hwdmd
