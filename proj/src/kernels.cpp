#include "hwdmd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hwdmd::kernels {

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

constexpr std::size_t kChunk = 4096;

inline double column_scale(const AssemblyPlan& plan, std::size_t j) {
  return plan.column_scale.empty() ? 1.0 : plan.column_scale[j];
}

inline void assemble_column(const Matrix& od, const Matrix& boarding, const AssemblyPlan& plan,
                            std::size_t j, Matrix& inputs, Matrix& targets) {
  const Index n = od.rows();
  const Index s = boarding.rows();
  const Index t = plan.targets[j];
  const double w = column_scale(plan, j);
  const auto col = static_cast<Index>(j);
  targets.col(col) = w * od.col(t);
  Index row = 0;
  for (const Index lag : plan.od_lags) {
    inputs.col(col).segment(row, n) = w * od.col(t - lag);
    row += n;
  }
  inputs.col(col).segment(row, s) = w * boarding.col(t - 1);
  inputs.col(col).segment(row + s, s) = w * boarding.col(t - 2);
}

void resize_for(const Matrix& od, const Matrix& boarding, const AssemblyPlan& plan,
                Matrix& inputs, Matrix& targets) {
  const auto m = static_cast<Index>(plan.targets.size());
  const auto h = static_cast<Index>(plan.od_lags.size());
  inputs.resize(h * od.rows() + 2 * boarding.rows(), m);
  targets.resize(od.rows(), m);
}

struct PartialSums {
  double squared_error = 0.0;
  double absolute_error = 0.0;
  double absolute_actual = 0.0;
  double squared_deviation = 0.0;
};

}  // namespace

namespace serial {

void accumulate_trips(std::span<const TripCell> cells, Matrix& od) {
  for (const TripCell& c : cells) od(c.od_row, c.interval) += 1.0;
}

void od_row_sums(const Matrix& od, Index stations, Matrix& boarding) {
  boarding.resize(stations, od.cols());
  for (Index t = 0; t < od.cols(); ++t) {
    for (Index i = 0; i < stations; ++i) {
      double sum = 0.0;
      for (Index j = 0; j < stations; ++j) sum += od(j * stations + i, t);
      boarding(i, t) = sum;
    }
  }
}

void assemble_regression(const Matrix& od, const Matrix& boarding, const AssemblyPlan& plan,
                         Matrix& inputs, Matrix& targets) {
  resize_for(od, boarding, plan, inputs, targets);
  for (std::size_t j = 0; j < plan.targets.size(); ++j) {
    assemble_column(od, boarding, plan, j, inputs, targets);
  }
}

ErrorSums error_sums(std::span<const double> actual, std::span<const double> predicted) {
  ErrorSums out;
  out.count = static_cast<Index>(actual.size());
  if (actual.empty()) return out;
  double sum = 0.0;
  for (const double a : actual) sum += a;
  out.mean_actual = sum / static_cast<double>(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    out.squared_error += e * e;
    out.absolute_error += std::abs(e);
    out.absolute_actual += std::abs(actual[i]);
    const double dev = actual[i] - out.mean_actual;
    out.squared_deviation += dev * dev;
  }
  return out;
}

}  // namespace serial

namespace parallel {

void accumulate_trips(std::span<const TripCell> cells, Matrix& od) {
  const auto count = static_cast<std::ptrdiff_t>(cells.size());
  double* data = od.data();
  const Index rows = od.rows();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const TripCell& c = cells[static_cast<std::size_t>(k)];
#pragma omp atomic
    data[c.interval * rows + c.od_row] += 1.0;
  }
}

void od_row_sums(const Matrix& od, Index stations, Matrix& boarding) {
  boarding.resize(stations, od.cols());
  const Index cols = od.cols();
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < cols; ++t) {
    auto b = boarding.col(t);
    b.setZero();
    for (Index j = 0; j < stations; ++j) b += od.col(t).segment(j * stations, stations);
  }
}

void assemble_regression(const Matrix& od, const Matrix& boarding, const AssemblyPlan& plan,
                         Matrix& inputs, Matrix& targets) {
  resize_for(od, boarding, plan, inputs, targets);
  const auto m = static_cast<std::ptrdiff_t>(plan.targets.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    assemble_column(od, boarding, plan, static_cast<std::size_t>(j), inputs, targets);
  }
}

ErrorSums error_sums(std::span<const double> actual, std::span<const double> predicted) {
  ErrorSums out;
  out.count = static_cast<Index>(actual.size());
  if (actual.empty()) return out;
  const std::size_t chunks = (actual.size() + kChunk - 1) / kChunk;
  const auto nchunks = static_cast<std::ptrdiff_t>(chunks);

  std::vector<double> partial_sum(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(actual.size(), lo + kChunk);
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += actual[i];
    partial_sum[static_cast<std::size_t>(c)] = sum;
  }
  double sum = 0.0;
  for (const double p : partial_sum) sum += p;
  out.mean_actual = sum / static_cast<double>(actual.size());
  const double mean = out.mean_actual;

  std::vector<PartialSums> partial(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(actual.size(), lo + kChunk);
    PartialSums p;
    for (std::size_t i = lo; i < hi; ++i) {
      const double e = actual[i] - predicted[i];
      p.squared_error += e * e;
      p.absolute_error += std::abs(e);
      p.absolute_actual += std::abs(actual[i]);
      const double dev = actual[i] - mean;
      p.squared_deviation += dev * dev;
    }
    partial[static_cast<std::size_t>(c)] = p;
  }
  for (const PartialSums& p : partial) {
    out.squared_error += p.squared_error;
    out.absolute_error += p.absolute_error;
    out.absolute_actual += p.absolute_actual;
    out.squared_deviation += p.squared_deviation;
  }
  return out;
}

}  // namespace parallel

}  // namespace hwdmd::kernels
