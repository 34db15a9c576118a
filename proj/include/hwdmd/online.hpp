#pragma once

#include "hwdmd/estimator.hpp"
#include "hwdmd/regression.hpp"

/// Daily expand / update / compress maintenance of an HwDmdModel. None of
/// these functions see data older than the batch they are given.
namespace hwdmd::online {

struct UpdateOptions {
  /// Residual directions are kept only when their singular value exceeds
  /// this fraction of the largest singular value of the new batch.
  double expand_tolerance = 1e-8;
};

struct ExpandStats {
  Index added_x = 0;
  Index added_y = 0;
};

/// Appends orthonormal bases of the residuals X_new - U_X U_X^T X_new and
/// Y_new - U_Y U_Y^T Y_new, and zero-pads P, Q_X, Q_Y to the new widths.
ExpandStats expand_bases(HwDmdModel& model, const DailyBatch& batch,
                         const UpdateOptions& options = {});

/// P <- rho P + Yt Xt^T, Q_X <- rho Q_X + Xt Xt^T, Q_Y <- rho Q_Y + Yt Yt^T
/// with Yt = U_Y^T Y_new and Xt = U_X^T X_new.
void update_cores(HwDmdModel& model, const DailyBatch& batch);

/// Rotates onto the leading r_X / r_Y eigenvectors of Q_X / Q_Y and drops the
/// rest. Q_X and Q_Y come out diagonal.
void compress(HwDmdModel& model);

/// expand_bases, update_cores, compress.
void daily_update(HwDmdModel& model, const DailyBatch& batch, const UpdateOptions& options = {});

}  // namespace hwdmd::online
