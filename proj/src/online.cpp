#include "hwdmd/online.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "hwdmd/error.hpp"
#include "hwdmd/linalg.hpp"

namespace hwdmd::online {

namespace {

double largest_singular_value(const Matrix& data) {
  if (data.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(data);
  return svd.singularValues()(0);
}

/// Orthonormal directions of `data` outside span(basis) whose singular value
/// in the residual exceeds `relative_tolerance` times the largest singular
/// value of `data`.
Matrix residual_directions(const Matrix& basis, const Matrix& data, double relative_tolerance) {
  Matrix residual = data - basis * (basis.transpose() * data);
  residual -= basis * (basis.transpose() * residual);

  const double threshold = relative_tolerance * largest_singular_value(data);
  const linalg::TruncatedSvd svd = linalg::truncated_svd(residual, residual.cols());

  Matrix accepted(data.rows(), svd.singular_values.size());
  Index count = 0;
  for (Index i = 0; i < svd.singular_values.size(); ++i) {
    const double sigma = svd.singular_values(i);
    if (!(sigma > threshold) || sigma == 0.0) break;
    Vector v = svd.left.col(i);
    // Two Gram-Schmidt passes against the old basis and the directions kept so
    // far; directions that were only rounding noise collapse here.
    for (int pass = 0; pass < 2; ++pass) {
      v -= basis * (basis.transpose() * v);
      const auto kept = accepted.leftCols(count);
      v -= kept * (kept.transpose() * v);
    }
    const double norm = v.norm();
    if (norm < 1e-3) continue;
    accepted.col(count++) = v / norm;
  }
  return accepted.leftCols(count);
}

Matrix padded(const Matrix& m, Index rows, Index cols) {
  Matrix out = Matrix::Zero(rows, cols);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

void check_batch(const HwDmdModel& model, const DailyBatch& batch) {
  if (batch.targets.rows() != model.od_size() || batch.inputs.rows() != model.input_size() ||
      batch.targets.cols() != batch.inputs.cols()) {
    throw NumericError("daily batch does not match the model dimensions");
  }
}

Matrix rank_updated(const Matrix& gram, double rho, const Matrix& reduced) {
  Matrix out = rho * gram;
  out.selfadjointView<Eigen::Lower>().rankUpdate(reduced);
  return out.selfadjointView<Eigen::Lower>();
}

}  // namespace

ExpandStats expand_bases(HwDmdModel& model, const DailyBatch& batch, const UpdateOptions& options) {
  check_batch(model, batch);
  const Matrix extra_x =
      residual_directions(model.basis_x, batch.inputs, options.expand_tolerance);
  const Matrix extra_y =
      residual_directions(model.basis_y, batch.targets, options.expand_tolerance);

  ExpandStats stats{extra_x.cols(), extra_y.cols()};
  if (stats.added_x > 0) {
    Matrix basis(model.basis_x.rows(), model.width_x() + stats.added_x);
    basis << model.basis_x, extra_x;
    model.basis_x = std::move(basis);
  }
  if (stats.added_y > 0) {
    Matrix basis(model.basis_y.rows(), model.width_y() + stats.added_y);
    basis << model.basis_y, extra_y;
    model.basis_y = std::move(basis);
  }
  const Index wx = model.width_x();
  const Index wy = model.width_y();
  model.cross = padded(model.cross, wy, wx);
  model.gram_x = padded(model.gram_x, wx, wx);
  model.gram_y = padded(model.gram_y, wy, wy);
  return stats;
}

void update_cores(HwDmdModel& model, const DailyBatch& batch) {
  check_batch(model, batch);
  const Index wx = model.width_x();
  const Index wy = model.width_y();
  if (model.cross.rows() != wy || model.cross.cols() != wx || model.gram_x.rows() != wx ||
      model.gram_x.cols() != wx || model.gram_y.rows() != wy || model.gram_y.cols() != wy) {
    throw NumericError("core matrices were not padded to the basis widths");
  }
  const double rho = model.hyper.rho;
  const Matrix reduced_x = model.basis_x.transpose() * batch.inputs;
  const Matrix reduced_y = model.basis_y.transpose() * batch.targets;
  model.cross = rho * model.cross + reduced_y * reduced_x.transpose();
  model.gram_x = rank_updated(model.gram_x, rho, reduced_x);
  model.gram_y = rank_updated(model.gram_y, rho, reduced_y);
}

void compress(HwDmdModel& model) {
  const linalg::SymmetricEigen eig_x = linalg::symmetric_eigen(model.gram_x);
  const linalg::SymmetricEigen eig_y = linalg::symmetric_eigen(model.gram_y);
  const Index kx = std::min(model.hyper.rank_x, model.width_x());
  const Index ky = std::min(model.hyper.rank_y, model.width_y());
  const auto vx = eig_x.vectors.leftCols(kx);
  const auto vy = eig_y.vectors.leftCols(ky);

  model.basis_x = model.basis_x * vx;
  model.basis_y = model.basis_y * vy;
  model.cross = vy.transpose() * model.cross * vx;
  // V^T Q V is the diagonal of kept eigenvalues; rounding can leave tiny
  // negative values on a PSD matrix.
  model.gram_x = eig_x.values.head(kx).cwiseMax(0.0).asDiagonal();
  model.gram_y = eig_y.values.head(ky).cwiseMax(0.0).asDiagonal();
}

void daily_update(HwDmdModel& model, const DailyBatch& batch, const UpdateOptions& options) {
  expand_bases(model, batch, options);
  update_cores(model, batch);
  compress(model);
}

}  // namespace hwdmd::online
