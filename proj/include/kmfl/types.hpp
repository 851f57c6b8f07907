#pragma once

#include <Eigen/Dense>

namespace kmfl {

using Index = Eigen::Index;

/// Row-major so that each particle (row) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Dense column-major matrix for small linear algebra (covariances etc.).
using DenseMatrix = Eigen::MatrixXd;

}  // namespace kmfl
