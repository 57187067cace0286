#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mfid/errors.hpp"
#include "mfid/signals.hpp"
#include "mfid/window_integral.hpp"

using namespace mfid;

namespace {

double test_signal(double t) { return std::sin(1.3 * t) + 0.5 * t * t; }
double test_signal_derivative(double t) { return 1.3 * std::cos(1.3 * t) + t; }

}  // namespace

TEST(Simpson, ExactForCubics) {
  for (std::size_t n : {9u, 10u, 11u, 24u}) {
    const double dt = 0.1;
    const auto w = simpson_weights(n, dt);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * std::pow(i * dt, 3);
    const double T = (n - 1) * dt;
    EXPECT_NEAR(s, std::pow(T, 4) / 4.0, 1e-12) << n;
  }
}

TEST(WindowIntegral, ConstantSignal) {
  const auto one = sample_expression([](double) { return 1.0; }, 0.0, 0.002, 10001);
  const Window w{2.0, 17.0};
  EXPECT_NEAR(window_integral(one, ModulatingKernel::sin_pow(2), 0, w), 7.5, 1e-9);
  for (const char* name : {"sinpow:2", "sinpow:4", "polypow:2", "oneminuscos"})
    EXPECT_NEAR(window_integral(one, ModulatingKernel::parse(name), 1, w), 0.0, 1e-9) << name;
}

TEST(WindowIntegral, LinearSignalFirstDerivative) {
  const auto ramp = sample_expression([](double t) { return t; }, 0.0, 1e-3, 1001);
  EXPECT_NEAR(window_integral(ramp, ModulatingKernel::sin_pow(2), 1, {0.0, 1.0}), -0.5, 1e-9);
}

TEST(WindowIntegral, IntegrationByParts) {
  const double dt = 0.002;
  const auto x = sample_expression(test_signal, 0.0, dt, 20001);
  const auto xd = sample_expression(test_signal_derivative, 0.0, dt, 20001);
  const Window w{3.0, 18.0};
  for (const char* name : {"sinpow:2", "sinpow:3", "polypow:2", "oneminuscos"}) {
    const auto k = ModulatingKernel::parse(name);
    const double lhs = window_integral(xd, k, 0, w);
    const double rhs = -window_integral(x, k, 1, w) / w.length();
    EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, std::abs(lhs))) << name;
  }
}

TEST(WindowIntegral, Linearity) {
  const double dt = 0.01;
  const auto x = sample_expression(test_signal, 0.0, dt, 3001);
  const auto z = sample_expression([](double t) { return std::cos(0.4 * t); }, 0.0, dt, 3001);
  const auto mix = sample_expression([](double t) { return 2.0 * test_signal(t) - 3.0 * std::cos(0.4 * t); },
                                     0.0, dt, 3001);
  const auto k = ModulatingKernel::sin_pow(3);
  const Window w{1.0, 16.0};
  for (int order = 0; order < 3; ++order) {
    const double lhs = window_integral(mix, k, order, w);
    const double rhs = 2.0 * window_integral(x, k, order, w) - 3.0 * window_integral(z, k, order, w);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(WindowIntegral, WindowOutsideDataIsRejected) {
  const auto x = sample_expression(test_signal, 0.0, 0.01, 1001);
  try {
    window_integral(x, ModulatingKernel::sin_pow(2), 0, {5.0, 12.0});
    FAIL() << "expected OutOfRangeError";
  } catch (const OutOfRangeError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid index"), std::string::npos) << e.what();
  }
}

TEST(WindowIntegral, TooFewSamples) {
  const auto x = sample_expression(test_signal, 0.0, 0.1, 100);
  EXPECT_THROW(window_integral(x, ModulatingKernel::sin_pow(2), 0, {1.0, 1.5}), ValidationError);
}

TEST(WindowIntegral, SnapsInward) {
  const auto x = sample_expression(test_signal, 0.0, 0.1, 100);
  const auto g = snap_window(x, {1.05, 3.95});
  EXPECT_NEAR(g.t1, 1.1, 1e-12);
  EXPECT_NEAR(g.t2, 3.9, 1e-12);
  EXPECT_EQ(g.samples(), 29u);
}
