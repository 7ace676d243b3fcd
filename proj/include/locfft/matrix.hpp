#pragma once

#include <Eigen/Dense>

namespace locfft {

/// Dense row-major matrix; rows are observations (windows), columns features.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace locfft
