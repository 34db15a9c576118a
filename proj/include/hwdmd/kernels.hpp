#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel`; the library
// calls the parallel one and the tests check the two against each other.

#include <cstdint>
#include <span>

#include "hwdmd/types.hpp"

namespace hwdmd::kernels {

/// A counted trip: global interval and row in the OD snapshot.
struct TripCell {
  Index interval = 0;
  Index od_row = 0;
};

/// Pooled sums behind RMSE, WMAPE and R^2.
struct ErrorSums {
  double squared_error = 0.0;
  double absolute_error = 0.0;
  double absolute_actual = 0.0;
  double squared_deviation = 0.0;  // sum of (actual - mean)^2
  double mean_actual = 0.0;
  Index count = 0;
};

/// Layout of one regression column block: for target column j (interval
/// targets[j]) the inputs are od(:, t - lag) for each OD lag, then
/// boarding(:, t - 1) and boarding(:, t - 2).
struct AssemblyPlan {
  std::span<const Index> od_lags;
  std::span<const Index> targets;
  std::span<const double> column_scale;  // empty means all ones
};

namespace serial {

void accumulate_trips(std::span<const TripCell> cells, Matrix& od);
void od_row_sums(const Matrix& od, Index stations, Matrix& boarding);
void assemble_regression(const Matrix& od, const Matrix& boarding, const AssemblyPlan& plan,
                         Matrix& inputs, Matrix& targets);
ErrorSums error_sums(std::span<const double> actual, std::span<const double> predicted);

}  // namespace serial

namespace parallel {

void accumulate_trips(std::span<const TripCell> cells, Matrix& od);
void od_row_sums(const Matrix& od, Index stations, Matrix& boarding);
void assemble_regression(const Matrix& od, const Matrix& boarding, const AssemblyPlan& plan,
                         Matrix& inputs, Matrix& targets);
/// Sums over fixed 4096-element chunks combined in chunk order, so the result
/// does not depend on the thread count.
ErrorSums error_sums(std::span<const double> actual, std::span<const double> predicted);

}  // namespace parallel

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int thread_count();

}  // namespace hwdmd::kernels
