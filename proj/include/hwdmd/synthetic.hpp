#pragma once

#include <cstdint>
#include <optional>

#include "hwdmd/snapshot_store.hpp"

namespace hwdmd {

/// Synthetic OD series with known low-rank lag-d dynamics.
///
/// Latent state z_i = [phi(slot); w_i] where phi holds a constant and daily
/// harmonics (periodic with period d) and w_i = R w_{i-d} with R a slow block
/// rotation. OD flows are y_i = M z_i with a non-negative skewed mixing M that
/// is zero on same-station pairs. With a regime shift, R and the w-columns of M
/// change from `shift_day` on.
struct SyntheticSpec {
  Index stations = 6;
  Index intervals_per_day = 36;
  Index days = 30;
  Index rank = 6;
  /// Standard deviation of additive noise, relative to sqrt(mean flow).
  double noise = 0.0;
  std::optional<Index> shift_day;
  std::uint64_t seed = 1;
  /// Mean OD flow per pair and interval, before skew.
  double mean_flow = 20.0;

  void validate() const;
};

struct SyntheticData {
  /// Rounded, non-negative counts; boarding is the exact row sum.
  SnapshotSeries series;
  /// Noise-free continuous flows that follow the latent system exactly.
  SnapshotSeries clean;
  Matrix mixing_before;   // n x r
  Matrix mixing_after;    // n x r (equals mixing_before without a shift)
  Matrix latent_before;   // r x r, z_i = T z_{i-d}
  Matrix latent_after;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace hwdmd
