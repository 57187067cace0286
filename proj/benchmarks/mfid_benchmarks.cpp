#include <cmath>

#include <benchmark/benchmark.h>

#include "mfid/batch.hpp"
#include "mfid/online.hpp"
#include "mfid/pipeline.hpp"
#include "mfid/signals.hpp"
#include "mfid/window_integral.hpp"

namespace {

double input(double t) { return 60.0 * std::cos(1.23 * t + 0.33 * std::sin(t) - 0.47 * std::cos(0.5 * t)); }

mfid::SystemSpec example_system(double delay) {
  mfid::SystemSpec s;
  s.order = 2;
  s.coefficients = {mfid::Profile::constant(-0.35), mfid::Profile::constant(-1.2)};
  s.gain = 2.0;
  s.input_delay = mfid::Profile::constant(delay);
  s.initial_state = {20.0, 0.3};
  return s;
}

void BM_WindowIntegral(benchmark::State& state) {
  const double dt = 1.0 / 500.0;
  const auto x = mfid::sample_expression(input, 0.0, dt, 60001);
  const auto kernel = mfid::ModulatingKernel::sin_pow(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfid::window_integral(x, kernel, static_cast<int>(state.range(0)), {10.0, 25.0}));
  }
}
BENCHMARK(BM_WindowIntegral)->Arg(0)->Arg(2);

void BM_Simulate(benchmark::State& state) {
  const double dt = 1.0 / static_cast<double>(state.range(0));
  const auto u = mfid::sample_expression(input, -20.0, dt, static_cast<std::size_t>(126.0 / dt));
  const auto spec = example_system(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(mfid::simulate(spec, u, 105.0, dt));
}
BENCHMARK(BM_Simulate)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Sin2DelayIteration(benchmark::State& state) {
  const double dt = 1.0 / 500.0;
  const auto u = mfid::sample_expression(input, -20.0, dt, static_cast<std::size_t>(126.0 / dt));
  const auto x = mfid::simulate(example_system(4.0), u, 105.0, dt);
  const auto windows = mfid::WindowSet::regular(10.0, 15.0, 10.0, 9);
  for (auto _ : state) benchmark::DoNotOptimize(mfid::estimate_delay_iterative(x[0], u, windows, {}));
}
BENCHMARK(BM_Sin2DelayIteration)->Unit(benchmark::kMillisecond);

void BM_OnlineStep(benchmark::State& state) {
  const double dt = 0.01;
  const auto u = mfid::sample_expression(input, -10.0, dt, 100000);
  mfid::OnlineConfig cfg;
  cfg.kernels = static_cast<int>(state.range(0));
  mfid::OnlineEstimator est(cfg, u, 0.0, dt);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.push(std::sin(t)));
    t += dt;
    if (t > 900.0) {
      state.PauseTiming();
      est = mfid::OnlineEstimator(cfg, u, 0.0, dt);
      t = 0.0;
      state.ResumeTiming();
    }
  }
}
BENCHMARK(BM_OnlineStep)->Arg(5)->Arg(8);

void BM_RunOnlineExample1(benchmark::State& state) {
  const auto sc = mfid::load_scenario("example1");
  const auto data = mfid::generate_data(sc, sc.noise.sigma, sc.noise.seed);
  for (auto _ : state) benchmark::DoNotOptimize(mfid::run_online(sc, data));
}
BENCHMARK(BM_RunOnlineExample1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
