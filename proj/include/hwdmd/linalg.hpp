#pragma once

#include "hwdmd/types.hpp"

/// Dense factorizations shared by the DMD and HW-DMD code paths.
namespace hwdmd::linalg {

struct TruncatedSvd {
  Matrix left;
  Vector singular_values;  // non-increasing
  Matrix right;
};

/// Leading `rank` singular triplets (clipped to min(rows, cols)). Each left
/// singular vector has its largest-magnitude entry made positive and the
/// matching right vector flipped with it.
TruncatedSvd truncated_svd(const Matrix& a, Index rank);

struct SymmetricEigen {
  Vector values;  // descending
  Matrix vectors;
};

/// Eigen-decomposition of the symmetric part of `q`, sorted by descending
/// eigenvalue, with the same sign convention as truncated_svd.
SymmetricEigen symmetric_eigen(const Matrix& q);

/// Values at or below max(dim) * 2^-52 * largest are treated as zero.
double pinv_tolerance(Index dim, double largest);

/// Moore-Penrose inverse of a symmetric PSD matrix through its eigenvalues.
/// `discarded`, when given, receives the number of non-zero eigenvalues that
/// fell under the tolerance.
Matrix symmetric_pinv(const Matrix& q, Index* discarded = nullptr);

/// Flips columns so that the first entry whose magnitude equals the column
/// maximum is positive. `paired` columns are flipped along with them.
void canonicalize_signs(Matrix& vectors, Matrix* paired = nullptr);

/// max |U^T U - I|.
double orthonormality_error(const Matrix& u);

/// max |Q - Q^T|.
double asymmetry(const Matrix& q);

}  // namespace hwdmd::linalg
