#pragma once

#include "mfid/batch.hpp"
#include "mfid/time_series.hpp"

namespace mfid {

struct RefineConfig {
  int max_iter = 30;
  int max_damping_retries = 12;
  double initial_damping = 1e-3;
  double relative_tolerance = 1e-10;  // stop when the cost drops by less than this fraction
  double fd_step = 1e-6;              // relative forward-difference step
  // Used only when the initial report carries no state at t = 0.
  double observer_window = 15.0;
  double observer_lambda = 1.0;
};

/// Sum of squared differences between y and the trajectory simulated from
/// (a, b, delay, x(0)) over y's samples. Throws like simulate().
double simulation_cost(const TimeSeries& y, const TimeSeries& u, const LinearModel& model,
                       const std::vector<double>& initial_state);

/// Damped Gauss-Newton (Levenberg-Marquardt) on the simulation error over
/// coefficients, gain, input delay, and initial state, with forward-difference
/// sensitivities. y must start at t = 0 and u must reach back to -delay.
///
/// Returns status no_improvement (and init unchanged) when not a single step
/// lowers the cost.
EstimateReport refine_nonlinear(const TimeSeries& y, const TimeSeries& u, const EstimateReport& init,
                                const RefineConfig& config = {});

}  // namespace mfid
