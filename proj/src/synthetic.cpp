#include "hwdmd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hwdmd/error.hpp"

namespace hwdmd {

namespace chr = std::chrono;

namespace {

constexpr double kConstantShare = 0.6;   // minimum constant share of a pair's mean
constexpr double kHarmonicShare = 0.25;  // amplitude of each daily harmonic
constexpr double kRotatingShare = 0.2;   // bound on the drifting component

Calendar synthetic_calendar(Index days, Index intervals_per_day) {
  Calendar cal;
  cal.intervals_per_day = intervals_per_day;
  cal.interval_minutes = static_cast<int>(std::clamp<Index>(18 * 60 / intervals_per_day, 1, 30));
  cal.day_start_minute = 6 * 60;
  auto day = chr::sys_days{chr::year{2019} / chr::January / 7};  // a Monday
  while (cal.day_count() < days) {
    const chr::weekday wd{day};
    if (wd != chr::Saturday && wd != chr::Sunday) cal.service_days.push_back(day);
    day += chr::days{1};
  }
  return cal;
}

Matrix block_rotation(Index q, double min_period, double max_period, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> period(min_period, max_period);
  Matrix r = Matrix::Identity(q, q);
  for (Index b = 0; b + 1 < q; b += 2) {
    const double theta = 2.0 * std::numbers::pi / period(rng);
    r(b, b) = std::cos(theta);
    r(b, b + 1) = -std::sin(theta);
    r(b + 1, b) = std::sin(theta);
    r(b + 1, b + 1) = std::cos(theta);
  }
  return r;
}

/// Rotating-part loadings; every row has 2-norm at most kRotatingShare * scale.
Matrix rotating_loadings(const Vector& scale, Index q, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(scale.size(), q);
  for (Index k = 0; k < scale.size(); ++k) {
    Vector row(q);
    for (Index c = 0; c < q; ++c) row(c) = normal(rng);
    const double norm = row.norm();
    std::uniform_real_distribution<double> share(0.3, 1.0);
    const double factor = norm > 0.0 ? kRotatingShare * share(rng) * scale(k) / norm : 0.0;
    m.row(k) = factor * row.transpose();
  }
  return m;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (stations < 2) throw ConfigError("synthetic series needs at least two stations");
  if (intervals_per_day < 3) throw ConfigError("synthetic series needs >= 3 intervals per day");
  if (days < 1) throw ConfigError("synthetic series needs at least one day");
  const Index n = stations * stations;
  const Index limit = std::min(n - stations, days * intervals_per_day);
  if (rank < 1 || rank > limit) {
    throw ConfigError("latent rank " + std::to_string(rank) + " infeasible; must lie in [1, " +
                      std::to_string(limit) + "]");
  }
  if (!(noise >= 0.0)) throw ConfigError("noise level must be non-negative");
  if (!(mean_flow > 0.0)) throw ConfigError("mean flow must be positive");
  if (shift_day && (*shift_day <= 0 || *shift_day >= days)) {
    throw ConfigError("regime shift day must lie inside the series");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Index s = spec.stations;
  const Index n = s * s;
  const Index d = spec.intervals_per_day;
  const Index total = spec.days * d;
  const Index p = std::min<Index>(3, spec.rank);
  const Index q = spec.rank - p;

  // Skewed per-pair scale, zero on same-station pairs, mean_flow on average.
  Vector scale = Vector::Zero(n);
  for (Index j = 0; j < s; ++j) {
    for (Index i = 0; i < s; ++i) {
      if (i != j) scale(od_index(i, j, s)) = std::exp(0.8 * normal(rng));
    }
  }
  scale *= spec.mean_flow * static_cast<double>(n - s) / scale.sum();

  Matrix mixing(n, spec.rank);
  for (Index k = 0; k < n; ++k) {
    mixing(k, 0) = scale(k) * (kConstantShare + (1.0 - kConstantShare) * unit(rng));
    for (Index c = 1; c < p; ++c) mixing(k, c) = scale(k) * kHarmonicShare * (2.0 * unit(rng) - 1.0);
  }
  Matrix mixing_after = mixing;
  Matrix rot_before = block_rotation(q, 8.0, 30.0, rng);
  Matrix rot_after = rot_before;
  if (q > 0) {
    mixing.rightCols(q) = rotating_loadings(scale, q, rng);
    mixing_after.rightCols(q) = mixing.rightCols(q);
    if (spec.shift_day) {
      mixing_after.rightCols(q) = rotating_loadings(scale, q, rng);
      rot_after = block_rotation(q, 4.0, 10.0, rng).transpose();
    }
  }

  // Unit-norm rotating state per slot.
  Matrix slot_state(q, d);
  for (Index k = 0; k < d; ++k) {
    Vector a(q);
    for (Index c = 0; c < q; ++c) a(c) = normal(rng);
    slot_state.col(k) = q > 0 ? Vector(a / a.norm()) : a;
  }

  SyntheticData out;
  out.mixing_before = mixing;
  out.mixing_after = mixing_after;
  out.latent_before = Matrix::Identity(spec.rank, spec.rank);
  out.latent_after = out.latent_before;
  if (q > 0) {
    out.latent_before.bottomRightCorner(q, q) = rot_before;
    out.latent_after.bottomRightCorner(q, q) = rot_after;
  }

  Matrix clean(n, total);
  Vector z(spec.rank);
  for (Index day = 0; day < spec.days; ++day) {
    const bool shifted = spec.shift_day && day >= *spec.shift_day;
    const Matrix& m = shifted ? mixing_after : mixing;
    for (Index slot = 0; slot < d; ++slot) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(slot) / static_cast<double>(d);
      z(0) = 1.0;
      if (p > 1) z(1) = std::cos(angle);
      if (p > 2) z(2) = std::sin(angle);
      if (q > 0) z.tail(q) = slot_state.col(slot);
      clean.col(day * d + slot) = m * z;
    }
    if (q > 0) {
      const bool next_shifted = spec.shift_day && day + 1 >= *spec.shift_day;
      slot_state = (next_shifted ? rot_after : rot_before) * slot_state;
    }
  }

  Matrix counts(n, total);
  for (Index t = 0; t < total; ++t) {
    for (Index k = 0; k < n; ++k) {
      const double mean = clean(k, t);
      const double noisy =
          spec.noise > 0.0 ? mean + spec.noise * std::sqrt(std::max(mean, 0.0)) * normal(rng) : mean;
      counts(k, t) = std::max(0.0, std::round(noisy));
    }
  }

  const Calendar cal = synthetic_calendar(spec.days, d);
  out.clean.stations = s;
  out.clean.calendar = cal;
  out.clean.od = std::move(clean);
  out.clean.boarding = boarding_from_od(out.clean.od, s);
  out.series.stations = s;
  out.series.calendar = cal;
  out.series.od = std::move(counts);
  out.series.boarding = boarding_from_od(out.series.od, s);
  return out;
}

}  // namespace hwdmd
