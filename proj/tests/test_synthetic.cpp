#include <doctest.h>

#include "hwdmd/error.hpp"
#include "hwdmd/synthetic.hpp"
#include "support.hpp"

using namespace hwdmd;

TEST_CASE("seeded generation is bit-reproducible") {
  SyntheticSpec spec;
  spec.noise = 0.5;
  spec.seed = 7;
  const SyntheticData a = generate_synthetic(spec);
  const SyntheticData b = generate_synthetic(spec);
  CHECK(a.series.od == b.series.od);
  CHECK(a.clean.od == b.clean.od);
  spec.seed = 8;
  CHECK(generate_synthetic(spec).series.od != a.series.od);
}

TEST_CASE("counts are non-negative integers with zero diagonal and exact boarding") {
  SyntheticSpec spec;
  spec.noise = 1.0;
  const SyntheticData data = generate_synthetic(spec);
  const SnapshotSeries& s = data.series;
  CHECK((s.od.array() >= 0).all());
  CHECK((s.od.array() == s.od.array().round()).all());
  CHECK(satisfies_boarding_identity(s));
  CHECK(s.calendar.day_count() == spec.days);
  CHECK(s.length() == spec.days * spec.intervals_per_day);
}

TEST_CASE("clean flows follow the latent system exactly") {
  SyntheticSpec spec;
  spec.stations = 4;
  spec.rank = 5;
  spec.days = 6;
  const SyntheticData data = generate_synthetic(spec);
  const Matrix& y = data.clean.od;
  const Index d = spec.intervals_per_day;
  const Matrix pinv = test::pinv_oracle(data.mixing_before);
  // rank(M) = r, so z = M^+ y and y_{i+d} = M T M^+ y_i.
  Eigen::JacobiSVD<Matrix> svd(data.mixing_before);
  CHECK(svd.rank() == 5);
  const Matrix step = data.mixing_before * data.latent_before * pinv;
  CHECK(test::relative_error(step * y.leftCols(y.cols() - d), y.rightCols(y.cols() - d)) < 1e-10);
  // Same-station pairs carry no flow.
  for (Index i = 0; i < 4; ++i) CHECK(data.mixing_before.row(od_index(i, i, 4)).isZero(0));
}

TEST_CASE("regime shift changes the operator from the shift day") {
  SyntheticSpec spec;
  spec.stations = 4;
  spec.rank = 6;
  spec.days = 12;
  spec.shift_day = 6;
  const SyntheticData data = generate_synthetic(spec);
  CHECK(data.latent_before != data.latent_after);
  CHECK(data.mixing_before != data.mixing_after);
  const Index d = spec.intervals_per_day;
  const Matrix& y = data.clean.od;
  const Matrix after = data.mixing_after * data.latent_after * test::pinv_oracle(data.mixing_after);
  const Matrix tail_prev = y.middleCols(7 * d, 4 * d);
  const Matrix tail_next = y.middleCols(8 * d, 4 * d);
  CHECK(test::relative_error(after * tail_prev, tail_next) < 1e-10);
  const Matrix before = data.mixing_before * data.latent_before * test::pinv_oracle(data.mixing_before);
  CHECK(test::relative_error(before * tail_prev, tail_next) > 1e-3);
}

TEST_CASE("infeasible specs") {
  SyntheticSpec spec;
  spec.rank = 40;  // n - s = 30 for s = 6
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = SyntheticSpec{};
  spec.shift_day = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = SyntheticSpec{};
  spec.noise = -1;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
}
