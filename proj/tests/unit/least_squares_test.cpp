#include <random>

#include <gtest/gtest.h>

#include "mfid/least_squares.hpp"

using namespace mfid;

namespace {

RegressionSystem random_system(int rows, int cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  RegressionSystem s;
  s.C.resize(rows, cols);
  s.D.resize(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) s.C(i, j) = n(rng) * std::pow(10.0, j);
    s.D(i) = n(rng);
  }
  return s;
}

}  // namespace

TEST(LeastSquares, ResidualIsOrthogonalToColumns) {
  const auto s = random_system(60, 5, 3);
  const auto sol = solve_least_squares(s);
  const Eigen::VectorXd r = s.C * sol.theta - s.D;
  EXPECT_LT((s.C.transpose() * r).norm(), 1e-8 * s.C.norm() * s.D.norm());
  EXPECT_NEAR(sol.residual_norm, r.norm(), 1e-12);
  EXPECT_EQ(sol.rank, 5);
}

TEST(LeastSquares, RecoversConsistentSystem) {
  auto s = random_system(40, 4, 9);
  Eigen::VectorXd truth(4);
  truth << 1.5, -0.25, 3.0, 1e-3;
  s.D = s.C * truth;
  const auto sol = solve_least_squares(s);
  EXPECT_LT((sol.theta - truth).norm(), 1e-10);
}

TEST(LeastSquares, ZeroColumnGetsZeroCoefficient) {
  auto s = random_system(30, 3, 5);
  s.C.col(1).setZero();
  const auto sol = solve_least_squares(s);
  EXPECT_EQ(sol.theta(1), 0.0);
  EXPECT_EQ(sol.rank, 2);
  EXPECT_TRUE(sol.theta.allFinite());
}
