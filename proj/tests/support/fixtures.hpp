#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfid/signals.hpp"
#include "mfid/time_series.hpp"

namespace mfid::testing {

inline double example1_input(double t) {
  return 60.0 * std::cos(1.23 * t + 1.3 * std::sin(t) - 0.7 * std::cos(0.5 * t));
}

inline double example2_input(double t) {
  return 60.0 * std::cos(1.23 * t + 0.33 * std::sin(t) - 0.47 * std::cos(0.5 * t));
}

inline double example3_output(double t) { return 3.0 * std::sin(t / 2.0) + 2.0 * std::cos(t / 3.0); }

inline std::size_t count_for(double t0, double t1, double dt) {
  return static_cast<std::size_t>(std::llround((t1 - t0) / dt)) + 1;
}

/// x'' = a1 x' + a0 x + b u(t - h), constant coefficients.
inline SystemSpec second_order(double a0, double a1, double b, double h, double x0 = 20.0,
                               double xd0 = 0.3) {
  SystemSpec s;
  s.order = 2;
  s.coefficients = {Profile::constant(a0), Profile::constant(a1)};
  s.gain = b;
  s.input_delay = Profile::constant(h);
  s.initial_state = {x0, xd0};
  return s;
}

struct Sim {
  TimeSeries u;
  std::vector<TimeSeries> x;  // x, x'
};

/// Example-2 style data: u from t = -lead, x on [0, horizon].
inline Sim simulate_example(const SystemSpec& spec, double (*input)(double), double rate,
                            double horizon, double lead = 20.0) {
  const double dt = 1.0 / rate;
  Sim s;
  s.u = sample_expression(input, -lead, dt, count_for(-lead, horizon + 1.0, dt));
  s.x = simulate(spec, s.u, horizon, dt);
  return s;
}

}  // namespace mfid::testing
