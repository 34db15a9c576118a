#pragma once

#include <Eigen/Dense>

namespace hwdmd {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Selects the serial reference or the OpenMP path of a kernel.
enum class Execution { serial, parallel };

}  // namespace hwdmd
