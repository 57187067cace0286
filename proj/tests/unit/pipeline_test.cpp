#include <cmath>

#include <gtest/gtest.h>

#include "mfid/errors.hpp"
#include "mfid/pipeline.hpp"

using namespace mfid;

TEST(Pipeline, NoiselessOutputEqualsState) {
  const auto sc = load_scenario("example2");
  const auto d = generate_data(sc, 0.0, 1);
  ASSERT_EQ(d.x.size(), d.y.size());
  for (std::size_t i = 0; i < d.x.size(); ++i) ASSERT_EQ(d.x[i], d.y[i]);
  EXPECT_NEAR(d.x.at(0.0), 20.0, 1e-12);
  EXPECT_NEAR(d.y.valid_end_time(), 105.0, 1e-9);
}

TEST(Pipeline, NoiseDependsOnSeedOnly) {
  const auto sc = load_scenario("example2");
  const auto clean = generate_data(sc, 0.0, 1);
  const auto a = with_noise(clean, 1.0, 5), b = generate_data(sc, 1.0, 5), c = with_noise(clean, 1.0, 6);
  bool differs = false;
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    ASSERT_EQ(a.y[i], b.y[i]);
    differs = differs || a.y[i] != c.y[i];
  }
  EXPECT_TRUE(differs);
}

TEST(Pipeline, OutputScenarioRoundTrip) {
  const auto d = generate_data(load_scenario("example3"), 0.0, 1);
  EXPECT_LT(d.roundtrip_error, 1e-4);
  EXPECT_GE(d.roundtrip_horizon, 20.0);
}

TEST(Pipeline, BatchNoiselessAndObserved) {
  const auto sc = load_scenario("example2");
  const auto d = generate_data(sc, 0.0, 1);
  const auto out = run_batch(sc, d.y, d.u, false);
  EXPECT_EQ(out.linear.status, EstimateStatus::converged);
  EXPECT_NEAR(out.linear.h[0], 4.0, 1e-3);
  ASSERT_EQ(out.linear.state.size(), 2u);
  EXPECT_NEAR(out.linear.state[0], 20.0, 1e-2);
  EXPECT_FALSE(out.refined.has_value());
}

TEST(Pipeline, TrialValueNames) {
  const auto sc = load_scenario("example3");
  const auto v = trial_values(sc, generate_data(sc, 0.0, 1), false);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0].first, "a");
  EXPECT_EQ(v[3].first, "h2");
  EXPECT_NEAR(v[3].second, 4.0, 1e-3);
}

TEST(MonteCarlo, NoiselessTrialsAgree) {
  MonteCarloOptions opt;
  opt.trials = 2;
  const auto s = run_monte_carlo(load_scenario("example2"), 0.0, opt);
  EXPECT_EQ(s.trials, 2);
  for (const auto& p : s.params) {
    EXPECT_EQ(p.n, 2u);
    EXPECT_LT(p.std, 1e-6) << p.name;
  }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeResults) {
  const auto sc = load_scenario("example3");
  MonteCarloOptions opt;
  opt.trials = 6;
  opt.threads = 1;
  const auto serial = run_monte_carlo(sc, 0.1, opt);
  opt.threads = 4;
  const auto parallel = run_monte_carlo(sc, 0.1, opt);
  ASSERT_EQ(serial.params.size(), parallel.params.size());
  for (std::size_t i = 0; i < serial.params.size(); ++i) {
    EXPECT_EQ(serial.params[i].mean, parallel.params[i].mean);
    EXPECT_EQ(serial.params[i].std, parallel.params[i].std);
  }
}

TEST(MonteCarlo, FailuresAreRethrownOrSkipped) {
  auto sc = load_scenario("example3");
  sc.two_delay.initial_state_delay = 0.0;
  sc.two_delay.initial_input_delay = 0.0;
  MonteCarloOptions opt;
  opt.trials = 3;
  EXPECT_THROW(run_monte_carlo(sc, 0.05, opt), IllConditionedDelayError);
  opt.skip_failed = true;
  const auto s = run_monte_carlo(sc, 0.05, opt);
  EXPECT_EQ(s.failures.size(), 3u);
  EXPECT_EQ(s.failures.front().seed, 1u);
}

TEST(MonteCarlo, Summarize) {
  const auto p = summarize("x", {1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(p.mean, 2.5);
  EXPECT_NEAR(p.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(p.n, 4u);
}
