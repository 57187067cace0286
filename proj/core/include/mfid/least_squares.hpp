#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfid {

/// Linear system C theta = D stacked from windowed integrals.
struct RegressionSystem {
  Eigen::MatrixXd C;
  Eigen::VectorXd D;
  std::vector<std::string> unknowns;

  Eigen::Index rows() const noexcept { return C.rows(); }
  Eigen::Index cols() const noexcept { return C.cols(); }
  double residual_norm(const Eigen::VectorXd& theta) const { return (C * theta - D).norm(); }
};

struct LeastSquaresSolution {
  Eigen::VectorXd theta;
  double residual_norm = 0.0;
  Eigen::Index rank = 0;
  double condition = 0.0;  // ratio of extreme |R_ii| after column scaling
};

/// Column-scaled, column-pivoted Householder QR. Columns that are identically
/// zero get a zero coefficient instead of breaking the factorization.
LeastSquaresSolution solve_least_squares(const RegressionSystem& system);

}  // namespace mfid
