#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mfid/errors.hpp"
#include "mfid/time_series.hpp"

using mfid::TimeSeries;

namespace {

TimeSeries cubic_series() {
  std::vector<double> v;
  for (int i = 0; i < 40; ++i) {
    const double t = 0.1 * i;
    v.push_back(t * t * t - 2.0 * t + 1.0);
  }
  return TimeSeries(0.0, 0.1, v);
}

}  // namespace

TEST(TimeSeries, GridTimes) {
  TimeSeries ts(-2.0, 0.5, std::vector<double>(9, 1.0));
  EXPECT_DOUBLE_EQ(ts.time(0), -2.0);
  EXPECT_DOUBLE_EQ(ts.time(8), 2.0);
  EXPECT_EQ(ts.valid_count(), 9u);
  EXPECT_TRUE(ts.covers(-2.0, 2.0));
  EXPECT_FALSE(ts.covers(-2.1, 2.0));
}

TEST(TimeSeries, GridPointsReturnStoredSamples) {
  const auto ts = cubic_series();
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(ts.at(ts.time(i)), ts[i]);
}

TEST(TimeSeries, CubicInterpolationIsExactForCubics) {
  const auto ts = cubic_series();
  for (double t = 0.05; t < 3.8; t += 0.137) {
    EXPECT_NEAR(ts.at(t), t * t * t - 2.0 * t + 1.0, 1e-12) << t;
  }
}

TEST(TimeSeries, OutsideValidRangeThrows) {
  TimeSeries ts(0.0, 0.1, std::vector<double>(20, 0.0), 5, 15);
  EXPECT_THROW(ts.at(0.2), mfid::OutOfRangeError);
  EXPECT_THROW(ts.at(1.6), mfid::OutOfRangeError);
  EXPECT_NO_THROW(ts.at(1.0));
}

TEST(TimeSeries, GridAlignment) {
  TimeSeries a(0.0, 0.01, std::vector<double>(10, 0.0));
  TimeSeries b(-1.0, 0.01, std::vector<double>(10, 0.0));
  TimeSeries c(0.005, 0.01, std::vector<double>(10, 0.0));
  EXPECT_TRUE(a.grid_aligned_with(b));
  EXPECT_FALSE(a.grid_aligned_with(c));
}
