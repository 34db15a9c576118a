#pragma once

#include <complex>

#include "hwdmd/types.hpp"

namespace hwdmd {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Output of exact DMD on a snapshot pair (Y_prev, Y_next).
struct DmdResult {
  ComplexVector eigenvalues;  // |lambda| descending, conjugate pairs adjacent
  ComplexMatrix modes;        // n x r, Phi = Y_next V Sigma^-1 W
  ComplexMatrix eigenvectors; // W, r x r
  Matrix reduced_operator;    // r x r, U^T Y_next V Sigma^-1
  Matrix basis;               // U, n x r
  Vector singular_values;     // r, non-increasing
};

/// Exact DMD with rank-r truncation:
///   Y_prev ~ U S V^T,  A~ = U^T Y_next V S^-1,  A~ W = W L,  Phi = Y_next V S^-1 W.
/// Throws ConfigError on shape mismatch or infeasible r and NumericError when a
/// kept singular value is numerically zero.
DmdResult exact_dmd(const Matrix& prev, const Matrix& next, Index rank);

}  // namespace hwdmd
