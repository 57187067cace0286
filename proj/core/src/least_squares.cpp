#include "mfid/least_squares.hpp"

#include <cmath>
#include <limits>

#include "mfid/errors.hpp"

namespace mfid {

LeastSquaresSolution solve_least_squares(const RegressionSystem& system) {
  const auto& C = system.C;
  const auto& D = system.D;
  if (C.rows() != D.size()) throw ValidationError("least squares: row count mismatch");
  if (!C.allFinite() || !D.allFinite()) {
    throw ValidationError("least squares: non-finite entries in the regression system");
  }

  LeastSquaresSolution out;
  out.theta = Eigen::VectorXd::Zero(C.cols());
  if (C.cols() == 0) {
    out.residual_norm = D.norm();
    return out;
  }

  Eigen::VectorXd scale = C.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    scale(j) = scale(j) > 0.0 ? 1.0 / scale(j) : 1.0;
  }
  const Eigen::MatrixXd scaled = C * scale.asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-12);
  out.rank = qr.rank();
  if (out.rank > 0) out.theta = scale.asDiagonal() * qr.solve(D);

  const auto R = qr.matrixR().topLeftCorner(std::min(C.rows(), C.cols()), std::min(C.rows(), C.cols()));
  double rmax = 0.0;
  double rmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    rmax = std::max(rmax, std::abs(R(i, i)));
    rmin = std::min(rmin, std::abs(R(i, i)));
  }
  out.condition = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  out.residual_norm = (C * out.theta - D).norm();
  return out;
}

}  // namespace mfid
