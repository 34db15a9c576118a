#include "hwdmd/exact_dmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hwdmd/error.hpp"
#include "hwdmd/linalg.hpp"

namespace hwdmd {

namespace {

// |lambda| descending; equal moduli by real part, then imaginary part, both
// descending, which keeps conjugate pairs adjacent.
std::vector<Index> eigen_order(const ComplexVector& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const double scale = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  const double tie = 1e-12 * std::max(scale, 1.0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto& x = values(a);
    const auto& y = values(b);
    if (std::abs(std::abs(x) - std::abs(y)) > tie) return std::abs(x) > std::abs(y);
    if (std::abs(x.real() - y.real()) > tie) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return order;
}

}  // namespace

DmdResult exact_dmd(const Matrix& prev, const Matrix& next, Index rank) {
  if (prev.rows() != next.rows() || prev.cols() != next.cols()) {
    throw ConfigError("snapshot matrices differ in shape");
  }
  const Index max_rank = std::min(prev.rows(), prev.cols());
  if (rank < 1 || rank > max_rank) {
    throw ConfigError("truncation rank " + std::to_string(rank) + " outside [1, " +
                      std::to_string(max_rank) + "]");
  }

  const linalg::TruncatedSvd svd = linalg::truncated_svd(prev, rank);
  const double tol =
      linalg::pinv_tolerance(std::max(prev.rows(), prev.cols()), svd.singular_values(0));
  for (Index i = 0; i < rank; ++i) {
    if (!(svd.singular_values(i) > tol)) {
      throw NumericError("singular value " + std::to_string(i) +
                         " of the snapshot matrix is zero; rank " + std::to_string(rank) +
                         " exceeds the data rank");
    }
  }

  const Matrix next_v_sinv =
      next * svd.right * svd.singular_values.cwiseInverse().asDiagonal();
  DmdResult out;
  out.basis = svd.left;
  out.singular_values = svd.singular_values;
  out.reduced_operator = svd.left.transpose() * next_v_sinv;

  Eigen::EigenSolver<Matrix> solver(out.reduced_operator);
  if (solver.info() != Eigen::Success) throw NumericError("eigen-decomposition did not converge");
  const ComplexVector values = solver.eigenvalues();
  const ComplexMatrix vectors = solver.eigenvectors();
  const std::vector<Index> order = eigen_order(values);

  out.eigenvalues.resize(rank);
  out.eigenvectors.resize(rank, rank);
  for (Index i = 0; i < rank; ++i) {
    out.eigenvalues(i) = values(order[static_cast<std::size_t>(i)]);
    out.eigenvectors.col(i) = vectors.col(order[static_cast<std::size_t>(i)]);
  }
  out.modes = next_v_sinv.cast<std::complex<double>>() * out.eigenvectors;
  return out;
}

}  // namespace hwdmd
