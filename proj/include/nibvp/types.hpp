#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nibvp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

}  // namespace nibvp
