#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mfid/errors.hpp"
#include "mfid/signals.hpp"

using namespace mfid;
using mfid::testing::count_for;

TEST(SampleExpression, ZeroGivesZeros) {
  const auto ts = sample_expression([](double) { return 0.0; }, 0.0, 0.01, 101);
  EXPECT_EQ(ts.size(), 101u);
  for (double v : ts.values()) EXPECT_EQ(v, 0.0);
}

TEST(SampleExpression, GridValues) {
  const auto ts = sample_expression(mfid::testing::example1_input, -10.0, 0.01, 2001);
  EXPECT_DOUBLE_EQ(ts.t0(), -10.0);
  EXPECT_NEAR(ts.at(0.0), 60.0 * std::cos(-0.7), 1e-12);
}

TEST(SampleExpression, NonFiniteValueNamesTheTime) {
  try {
    sample_expression([](double t) { return 1.0 / (t - 0.5); }, 0.0, 0.25, 5);
    FAIL() << "expected SamplingError";
  } catch (const SamplingError& e) {
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
  }
}

TEST(AddNoise, ZeroSigmaIsIdentity) {
  const auto ts = sample_expression([](double t) { return std::sin(t); }, 0.0, 0.01, 500);
  const auto n = add_noise(ts, {0.0, 7});
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(n[i], ts[i]);
}

TEST(AddNoise, SeededAndUnbiased) {
  const auto ts = sample_expression([](double) { return 3.0; }, 0.0, 0.01, 40000);
  const auto a = add_noise(ts, {5.0, 11});
  const auto b = add_noise(ts, {5.0, 11});
  const auto c = add_noise(ts, {5.0, 12});
  double mean = 0.0, var = 0.0;
  bool differs = false;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    ASSERT_EQ(a[i], b[i]);
    differs = differs || a[i] != c[i];
    mean += a[i] - 3.0;
  }
  mean /= static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) var += std::pow(a[i] - 3.0 - mean, 2);
  var /= static_cast<double>(ts.size() - 1);
  EXPECT_TRUE(differs);
  EXPECT_LT(std::abs(mean), 4.0 * 5.0 / std::sqrt(40000.0));
  EXPECT_NEAR(std::sqrt(var), 5.0, 0.1);
}

TEST(AddNoise, NegativeSigmaRejected) {
  const auto ts = sample_expression([](double) { return 0.0; }, 0.0, 0.01, 10);
  EXPECT_THROW(add_noise(ts, {-1.0, 1}), ValidationError);
}

TEST(Shift, ZeroDelayIsIdentity) {
  const auto ts = sample_expression([](double t) { return std::cos(t); }, 0.0, 0.01, 300);
  const auto s = shift(ts, 0.0);
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_EQ(s[i], ts[i]);
}

TEST(Shift, IntegerShiftMovesSamples) {
  const auto ts = sample_expression([](double t) { return t * t; }, 0.0, 0.1, 50);
  const auto s = shift(ts, 0.3);
  EXPECT_EQ(s.valid_begin(), 3u);
  for (std::size_t i = s.valid_begin(); i < s.valid_end(); ++i) EXPECT_DOUBLE_EQ(s[i], ts[i - 3]);
}

TEST(Shift, FractionalShiftOfSinusoid) {
  const auto ts = sample_expression([](double t) { return std::sin(1.3 * t); }, -5.0, 0.002, 10001);
  const double d = 0.3217;
  const auto s = shift(ts, d);
  double err = 0.0;
  for (std::size_t i = s.valid_begin(); i < s.valid_end(); ++i)
    err = std::max(err, std::abs(s[i] - std::sin(1.3 * (s.time(i) - d))));
  EXPECT_LT(err, 1e-6);
}

TEST(Shift, RoundTrip) {
  const auto ts = sample_expression(mfid::testing::example2_input, -20.0, 0.002, 20001);
  const double d = 1.2345;
  const auto back = shift(shift(ts, d), -d);
  double err = 0.0;
  for (std::size_t i = back.valid_begin(); i < back.valid_end(); ++i)
    err = std::max(err, std::abs(back[i] - ts[i]));
  EXPECT_GT(back.valid_count(), 15000u);
  EXPECT_LT(err, 1e-6 * 60.0);
}

TEST(Shift, ExcludesSamplesWithoutSource) {
  const auto ts = sample_expression([](double t) { return t; }, 0.0, 0.1, 100);
  const auto s = shift(ts, 2.05);
  EXPECT_GE(s.valid_start_time(), 2.05 - 1e-12);
  EXPECT_THROW(s.at(1.0), OutOfRangeError);
}

TEST(Simulate, ZeroSystemStaysAtRest) {
  auto spec = mfid::testing::second_order(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
  const auto u = sample_expression([](double t) { return std::sin(t); }, 0.0, 0.01, 1101);
  const auto x = simulate(spec, u, 10.0, 0.01);
  ASSERT_EQ(x.size(), 2u);
  for (double v : x[0].values()) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, HarmonicOscillator) {
  auto spec = mfid::testing::second_order(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
  const double dt = 1e-3;
  const auto u = sample_expression([](double) { return 0.0; }, 0.0, dt, count_for(0, 51, dt));
  const auto x = simulate(spec, u, 50.0, dt);
  double err = 0.0;
  for (std::size_t i = 0; i < x[0].size(); ++i) {
    err = std::max(err, std::abs(x[0][i] - std::cos(x[0].time(i))));
    err = std::max(err, std::abs(x[1][i] + std::sin(x[0].time(i))));
  }
  EXPECT_LT(err, 1e-6);
}

TEST(Simulate, FourthOrderConvergence) {
  auto spec = mfid::testing::second_order(-2.0, -0.5, 1.0, 0.0, 1.0, 0.0);
  auto error_at = [&](double dt) {
    const auto u = sample_expression([](double t) { return std::cos(2.0 * t); }, 0.0, dt,
                                     count_for(0, 11, dt));
    const auto x = simulate(spec, u, 10.0, dt);
    const double dtf = dt / 16.0;
    const auto uf = sample_expression([](double t) { return std::cos(2.0 * t); }, 0.0, dtf,
                                      count_for(0, 11, dtf));
    const auto xf = simulate(spec, uf, 10.0, dtf);
    return std::abs(x[0][x[0].size() - 1] - xf[0][xf[0].size() - 1]);
  };
  const double e1 = error_at(0.1), e2 = error_at(0.05);
  EXPECT_GT(e1 / e2, 8.0) << e1 << " " << e2;
}

TEST(Simulate, DelayedInputMatchesShiftedInput) {
  const double h = 0.7, dt = 0.01;
  auto delayed = mfid::testing::second_order(-0.35, -1.2, 2.0, h);
  auto plain = mfid::testing::second_order(-0.35, -1.2, 2.0, 0.0);
  const auto u = sample_expression(mfid::testing::example1_input, -5.0, dt, count_for(-5, 21, dt));
  const auto a = simulate(delayed, u, 20.0, dt);
  const auto b = simulate(plain, shift(u, h), 20.0, dt);
  for (std::size_t i = 0; i < a[0].size(); ++i) EXPECT_NEAR(a[0][i], b[0][i], 1e-9);
}

TEST(Simulate, InputMustCoverTheDelayedRange) {
  auto spec = mfid::testing::second_order(-0.35, -1.2, 2.0, 3.0);
  const auto u = sample_expression([](double) { return 1.0; }, -1.0, 0.01, 1201);
  EXPECT_THROW(simulate(spec, u, 10.0, 0.01), OutOfRangeError);
}

TEST(Simulate, BlowUpIsReported) {
  SystemSpec spec;
  spec.order = 1;
  spec.coefficients = {Profile::constant(5.0)};
  spec.gain = 0.0;
  spec.initial_state = {1.0};
  const auto u = sample_expression([](double) { return 0.0; }, 0.0, 0.01, 1201);
  EXPECT_THROW(simulate(spec, u, 10.0, 0.01), DivergenceError);
}

TEST(Invert, ConstantOutput) {
  auto spec = mfid::testing::second_order(-0.35, -1.2, 2.0, 0.0);
  const auto x = sample_expression([](double) { return 4.0; }, 0.0, 0.01, 500);
  const auto u = invert_for_input(spec, x);
  for (std::size_t i = u.valid_begin(); i < u.valid_end(); ++i) EXPECT_NEAR(u[i], 0.35 * 4.0 / 2.0, 1e-10);
}

TEST(Invert, PureDoubleIntegrator) {
  auto spec = mfid::testing::second_order(0.0, 0.0, 2.0, 0.0);
  const auto x = sample_expression([](double t) { return std::sin(t); }, 0.0, 0.01, 1000);
  const auto u = invert_for_input(spec, x);
  for (std::size_t i = u.valid_begin(); i < u.valid_end(); ++i)
    EXPECT_NEAR(u[i], -std::sin(u.time(i)) / 2.0, 1e-8);
}

TEST(Invert, ZeroGainIsNotInvertible) {
  auto spec = mfid::testing::second_order(-1.0, 0.0, 0.0, 0.0);
  const auto x = sample_expression([](double t) { return std::sin(t); }, 0.0, 0.01, 100);
  EXPECT_THROW(invert_for_input(spec, x), NonInvertibleError);
}

TEST(Invert, TwoDelayRoundTrip) {
  const double dt = 0.002;
  SystemSpec spec;
  spec.order = 2;
  spec.coefficients = {Profile::constant(-2.7), Profile::constant(0.0)};
  spec.gain = 1.5;
  spec.state_delay = 2.0;
  spec.input_delay = Profile::constant(4.0);
  spec.initial_state = {mfid::testing::example3_output(0.0), 1.5};
  spec.history = mfid::testing::example3_output;
  const auto x = sample_expression(mfid::testing::example3_output, -30.0, dt, count_for(-30, 30, dt));
  const auto u = invert_for_input(spec, x);
  const auto sim = simulate(spec, u, 20.0, dt);
  double err = 0.0;
  for (std::size_t i = 0; i < sim[0].size(); ++i)
    err = std::max(err, std::abs(sim[0][i] - mfid::testing::example3_output(sim[0].time(i))));
  EXPECT_LT(err, 1e-4);
}

TEST(Differentiate, FivePointStencil) {
  const auto ts = sample_expression([](double t) { return std::sin(2.0 * t); }, 0.0, 0.01, 500);
  const auto d = differentiate(ts);
  EXPECT_EQ(d.valid_begin(), 2u);
  EXPECT_EQ(d.valid_end(), ts.size() - 2);
  for (std::size_t i = d.valid_begin(); i < d.valid_end(); ++i)
    EXPECT_NEAR(d[i], 2.0 * std::cos(2.0 * d.time(i)), 1e-7);
}

TEST(Profile, RampAfter) {
  const auto p = Profile::ramp_after(-1.2, 30.0, -0.02);
  EXPECT_DOUBLE_EQ(p(10.0), -1.2);
  EXPECT_NEAR(p(60.0), -1.8, 1e-12);
  EXPECT_FALSE(p.is_constant());
  EXPECT_TRUE(Profile::constant(2.0).is_constant());
}
