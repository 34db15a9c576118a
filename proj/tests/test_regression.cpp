#include <doctest.h>

#include "hwdmd/error.hpp"
#include "hwdmd/regression.hpp"
#include "support.hpp"

using namespace hwdmd;

namespace {

// OD entries are distinct integers so any misalignment is visible.
SnapshotSeries distinct_series(Index stations, Index d, Index days) {
  const Index n = stations * stations;
  Matrix od(n, d * days);
  for (Index t = 0; t < od.cols(); ++t) {
    for (Index r = 0; r < n; ++r) od(r, t) = 1000.0 * t + r;
  }
  return test::series_of(od, stations, d);
}

}  // namespace

TEST_CASE("lag spec parsing and validation") {
  const LagSpec l = LagSpec::parse("3,4,8,14");
  CHECK(l.order() == 4);
  CHECK(l.max_lag() == 14);
  CHECK(l.input_size(2) == 4 * 4 + 4);
  CHECK(l.to_string() == "3,4,8,14");
  CHECK_THROWS_AS(LagSpec::parse("2,4"), ConfigError);
  CHECK_THROWS_AS(LagSpec::parse("4,3"), ConfigError);
  CHECK_THROWS_AS(LagSpec::parse("3,3"), ConfigError);
  CHECK_THROWS_AS(LagSpec::parse(""), ConfigError);
  CHECK_THROWS_AS(LagSpec::parse("3,x"), ConfigError);
  CHECK(LagSpec::boarding_lags[0] == 1);
  CHECK(LagSpec::boarding_lags[1] == 2);
}

TEST_CASE("s=2, t=10, lags {3}: sizes and first column") {
  const SnapshotSeries s = distinct_series(2, 10, 1);
  const RegressionPair p = build_pair(s, LagSpec::make({3}), 10);
  CHECK(p.inputs.rows() == 8);
  CHECK(p.inputs.cols() == 7);
  CHECK(p.targets.cols() == 7);
  // First column: target f_3 (0-based), inputs [f_0; b_2; b_1].
  CHECK(p.targets.col(0) == s.od.col(3));
  CHECK(p.inputs.col(0).head(4) == s.od.col(0));
  CHECK(p.inputs.col(0).segment(4, 2) == s.boarding.col(2));
  CHECK(p.inputs.col(0).segment(6, 2) == s.boarding.col(1));
}

TEST_CASE("lags {3,4}, t=5: a single column") {
  const SnapshotSeries s = distinct_series(2, 5, 1);
  const RegressionPair p = build_pair(s, LagSpec::make({3, 4}), 5);
  REQUIRE(p.columns() == 1);
  CHECK(p.targets.col(0) == s.od.col(4));
  CHECK(p.inputs.col(0).segment(0, 4) == s.od.col(1));
  CHECK(p.inputs.col(0).segment(4, 4) == s.od.col(0));
  CHECK(p.inputs.col(0).segment(8, 2) == s.boarding.col(3));
  CHECK(p.inputs.col(0).segment(10, 2) == s.boarding.col(2));
}

TEST_CASE("build_pair matches the brute-force oracle") {
  const SnapshotSeries s = test::random_series(3, 12, 4, 9);
  for (const auto& lags : {LagSpec::make({3}), LagSpec::make({3, 5, 12}), LagSpec::make({4, 13})}) {
    for (const Index first : {Index{0}, Index{20}}) {
      const RegressionPair p = build_pair(s, lags, 40, first);
      Matrix y, x;
      test::regression_oracle(s, lags, 40, first, 1.0, y, x);
      CHECK(p.targets == y);
      CHECK(p.inputs == x);
      CHECK(p.inputs.rows() == lags.order() * 9 + 6);
      CHECK(p.target_intervals.front() == std::max(first, lags.max_lag()));
      CHECK(p.column_day.back() == s.calendar.day_of(39));
    }
  }
}

TEST_CASE("too short a series names the lag") {
  const SnapshotSeries s = distinct_series(2, 5, 1);
  try {
    build_pair(s, LagSpec::make({3, 5}), 5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find('5') != std::string::npos);
  }
}

TEST_CASE("column weights") {
  const std::vector<Index> days{0, 0, 1, 1, 2};
  const auto w1 = column_weights(days, 1.0);
  for (const double w : w1) CHECK(w == 1.0);
  const auto w = column_weights(days, 0.81);
  CHECK(w[4] == 1.0);
  CHECK(w[2] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(w[0] == w[1]);
  CHECK(w[0] == doctest::Approx(0.81).epsilon(1e-15));
  for (std::size_t k = 1; k < w.size(); ++k) CHECK(w[k - 1] <= w[k]);
  CHECK_THROWS_AS(column_weights(days, 0.0), ConfigError);
  CHECK_THROWS_AS(column_weights(days, 1.01), ConfigError);
  CHECK_THROWS_AS(column_weights(days, -0.5), ConfigError);
}

TEST_CASE("8-day-old column with rho = 0.92 has squared weight 0.92^8") {
  std::vector<Index> days{0, 8};
  const auto w = column_weights(days, 0.92);
  CHECK(std::abs(w[0] * w[0] - std::pow(0.92, 8)) < 1e-12);
  CHECK(w[0] * w[0] == doctest::Approx(0.513).epsilon(1e-3));
}

TEST_CASE("weighted pair equals the oracle; rho = 1 is a no-op") {
  const SnapshotSeries s = test::random_series(2, 6, 5, 4);
  const LagSpec lags = LagSpec::make({3, 7});
  const RegressionPair raw = build_pair(s, lags, 29);
  const RegressionPair same = apply_weights(raw, 1.0);
  CHECK(same.targets == raw.targets);
  CHECK(same.inputs == raw.inputs);

  const RegressionPair w = apply_weights(raw, 0.8);
  const RegressionPair direct = build_weighted_pair(s, lags, 29, 0, 0.8);
  Matrix y, x;
  test::regression_oracle(s, lags, 29, 0, 0.8, y, x);
  CHECK((w.targets - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w.inputs - x).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((direct.targets - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((direct.inputs - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("weighted OLS equals the weighted objective") {
  // min sum_j rho^(age_j) ||y_j - G x_j||^2 via normal equations with a
  // diagonal weight matrix, against OLS on the sigma-scaled columns.
  const SnapshotSeries s = test::random_series(2, 8, 6, 21);
  const LagSpec lags = LagSpec::make({3, 8});
  const RegressionPair raw = build_pair(s, lags, 48);
  const double rho = 0.85;
  const auto w = column_weights(raw.column_day, rho);
  Vector omega(raw.columns());
  for (Index j = 0; j < raw.columns(); ++j) omega(j) = w[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)];
  const Matrix x = raw.inputs;
  const Matrix y = raw.targets;
  const Matrix g_objective = (y * omega.asDiagonal() * x.transpose()) *
                             test::pinv_oracle(x * omega.asDiagonal() * x.transpose());
  const RegressionPair wp = apply_weights(raw, rho);
  const Matrix g_ols = wp.targets * test::pinv_oracle(wp.inputs);
  CHECK(test::relative_error(g_ols, g_objective) < 1e-10);
}

TEST_CASE("daily batch is one day of aligned columns") {
  const SnapshotSeries s = test::random_series(2, 6, 4, 8);
  const LagSpec lags = LagSpec::make({3, 6});
  const DailyBatch b = daily_batch(s, lags, 2);
  const RegressionPair p = build_pair(s, lags, 18, 12);
  CHECK(b.targets.cols() == 6);
  CHECK(b.targets == p.targets);
  CHECK(b.inputs == p.inputs);
  CHECK_THROWS_AS(daily_batch(s, LagSpec::make({3, 7}), 1), DataError);
  CHECK_THROWS(daily_batch(s, lags, 4));
}
