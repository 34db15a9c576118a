#include "hwdmd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hwdmd::linalg {

namespace {

TruncatedSvd from_bdcsvd(const Matrix& a, Index k) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(k), svd.singularValues().head(k), svd.matrixV().leftCols(k)};
}

}  // namespace

TruncatedSvd truncated_svd(const Matrix& a, Index rank) {
  const Index k = std::max<Index>(0, std::min({rank, a.rows(), a.cols()}));
  TruncatedSvd out;
  if (k == 0) {
    out.left.resize(a.rows(), 0);
    out.singular_values.resize(0);
    out.right.resize(a.cols(), 0);
    return out;
  }
  if (a.rows() >= 2 * a.cols()) {
    // Tall: factor the small triangular factor of a thin QR instead.
    Eigen::HouseholderQR<Matrix> qr(a);
    const Index c = a.cols();
    const Matrix r = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    TruncatedSvd small = from_bdcsvd(r, k);
    const Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), c);
    out.left = q * small.left;
    out.singular_values = std::move(small.singular_values);
    out.right = std::move(small.right);
  } else if (a.cols() >= 2 * a.rows()) {
    TruncatedSvd t = truncated_svd(a.transpose(), k);
    out.left = std::move(t.right);
    out.singular_values = std::move(t.singular_values);
    out.right = std::move(t.left);
  } else {
    out = from_bdcsvd(a, k);
  }
  canonicalize_signs(out.left, &out.right);
  return out;
}

SymmetricEigen symmetric_eigen(const Matrix& q) {
  const Matrix sym = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Index n = sym.rows();
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  if (n > 0) canonicalize_signs(out.vectors);
  return out;
}

double pinv_tolerance(Index dim, double largest) {
  return static_cast<double>(std::max<Index>(dim, 1)) * std::numeric_limits<double>::epsilon() *
         largest;
}

Matrix symmetric_pinv(const Matrix& q, Index* discarded) {
  const SymmetricEigen eig = symmetric_eigen(q);
  const Index n = q.rows();
  const double largest = n > 0 ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  const double tol = pinv_tolerance(n, largest);
  Vector inv = Vector::Zero(n);
  Index dropped = 0;
  for (Index i = 0; i < n; ++i) {
    if (eig.values(i) > tol) {
      inv(i) = 1.0 / eig.values(i);
    } else if (eig.values(i) != 0.0) {
      ++dropped;
    }
  }
  if (discarded) *discarded = dropped;
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

void canonicalize_signs(Matrix& vectors, Matrix* paired) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    const auto col = vectors.col(j);
    const double peak = col.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    // First entry within rounding of the peak, so near-ties resolve by position.
    Index pick = 0;
    while (std::abs(col(pick)) < peak * (1.0 - 1e-12)) ++pick;
    if (col(pick) < 0.0) {
      vectors.col(j) *= -1.0;
      if (paired) paired->col(j) *= -1.0;
    }
  }
}

double orthonormality_error(const Matrix& u) {
  if (u.cols() == 0) return 0.0;
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

double asymmetry(const Matrix& q) {
  if (q.size() == 0) return 0.0;
  return (q - q.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace hwdmd::linalg
