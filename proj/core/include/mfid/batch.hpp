#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mfid/kernels.hpp"
#include "mfid/least_squares.hpp"
#include "mfid/time_series.hpp"
#include "mfid/window_integral.hpp"

namespace mfid {

struct WindowSet {
  std::vector<Window> windows;

  /// count windows [t1 + k*step, t1 + k*step + length], k = 0 .. count-1.
  static WindowSet regular(double first_t1, double length, double step, int count);
  double min_length() const;
  bool uniform_length() const;
};

enum class DelayVariant {
  taylor,  // first-order (or order-k) Taylor columns, delay = b1 / b0
  sin2,    // exact shift identity of sin^2, delay read from (b0, b1, b2)
};

enum class EstimateStatus { converged, max_iterations, diverged, no_improvement };

std::string to_string(EstimateStatus status);

struct IterationRecord {
  int iteration = 0;
  std::vector<double> h_hat;  // delay estimate(s) after this iteration
  double b0 = 0.0;
  double b1 = 0.0;  // b0 times the residual delay, whatever the variant
  double residual = 0.0;
};

struct EstimateReport {
  std::vector<double> a;  // a_0 .. a_{n-1} (two-delay form: the single coefficient a)
  double b = 0.0;
  std::vector<double> h;  // input delay, or (state delay, input delay)
  std::vector<double> state;  // observed x, x', ... at state_time (empty if not observed)
  double state_time = 0.0;
  double residual = 0.0;
  double cost = std::numeric_limits<double>::quiet_NaN();  // simulation-error cost, if refined
  std::vector<IterationRecord> trace;
  EstimateStatus status = EstimateStatus::max_iterations;
  std::string message;
};

struct DelayConfig {
  int order = 2;
  DelayVariant variant = DelayVariant::sin2;
  std::vector<ModulatingKernel> kernels;  // taylor variant; default sinpow:max(n, k+1)
  int taylor_order = 1;
  int max_iter = 50;
  double tolerance = 0.0;  // <= 0 selects 1e-6 * shortest window length
  double initial_delay = 0.0;
  // sin2: allowed | |(cos, sin)| - 1 |, checked from the second pass on.
  double norm_tolerance = 0.5;
};

struct TwoDelayConfig {
  int max_iter = 10;
  double tolerance = 0.0;  // <= 0 selects 1e-6 * window length
  double initial_state_delay = 0.0;
  double initial_input_delay = 0.0;
};

/// Parameters handed to the state observer and the nonlinear refinement.
struct LinearModel {
  std::vector<double> a;  // a_0 .. a_{n-1}, with a_n = -1
  double b = 0.0;
  double delay = 0.0;
};

LinearModel model_of(const EstimateReport& report);

// --- regression assembly --------------------------------------------------

/// One row per (window, kernel): sum_{i<n} a_i (-1)^i L^-i I_{y,f^(i)} + b I_{u,f}
/// = (-1)^n L^-n I_{y,f^(n)}. Unknowns (a_0 .. a_{n-1}, b).
RegressionSystem build_delay_free_system(const TimeSeries& y, const TimeSeries& u,
                                         const std::vector<ModulatingKernel>& kernels,
                                         const WindowSet& windows, int order);
RegressionSystem build_delay_free_system(const TimeSeries& y, const TimeSeries& u,
                                         const std::vector<ModulatingKernel>& kernels,
                                         const Window& window, int order);

/// Adds Taylor columns L^-l / l! I_{u,f^(l)}, l = 0..k, so that b_l = b h^l.
/// Unknowns (a_0 .. a_{n-1}, b_0 .. b_k).
RegressionSystem build_taylor_delay_system(const TimeSeries& y, const TimeSeries& u_shifted,
                                           const std::vector<ModulatingKernel>& kernels,
                                           const WindowSet& windows, int order, int truncation);

/// sin^2 kernel with the exact shift identity
///   sin^2(pi(theta + d)) = sin^2(pi theta) + c1(d) cos(2 pi theta) + c2(d) sin(2 pi theta).
/// Unknowns (a_0 .. a_{n-1}, b_0, b_1, b_2) with b_1 = b c1, b_2 = b c2.
/// All windows must share one length.
RegressionSystem build_sin2_delay_system(const TimeSeries& y, const TimeSeries& u_shifted,
                                         const WindowSet& windows, int order);

/// (c1, c2) for a normalized shift d = delay / L.
std::pair<double, double> sin2_shift_coefficients(double d);

/// Residual delay from the Taylor unknowns: b_1 / b_0.
double taylor_residual_delay(const Eigen::VectorXd& theta, int order);

/// Residual delay from (b_0, b_1, b_2) of the sin^2 system; quadrant
/// resolved with atan2. Throws IllConditionedDelayError when the implied
/// (cos, sin) pair is off the unit circle by more than norm_tolerance.
double sin2_residual_delay(double b0, double b1, double b2, double window_length,
                           double norm_tolerance);

// --- estimators -----------------------------------------------------------

/// Fixed-point delay refinement: shift u by the current estimate, solve,
/// add the residual delay, repeat.
EstimateReport estimate_delay_iterative(const TimeSeries& y, const TimeSeries& u,
                                        const WindowSet& windows, const DelayConfig& config);

/// x'' + a x(t - h1) = b u(t - h2) with the 1 - cos(2 pi theta) kernel.
/// Report: a = {a}, b, h = {h1, h2}.
EstimateReport estimate_two_delay(const TimeSeries& y, const TimeSeries& u,
                                  const WindowSet& windows, const TwoDelayConfig& config);

/// Estimates x, x', ..., x^(n-1) at one end of the window from the g_j
/// boundary-term equations, using exp_poly kernels anchored at that end.
std::vector<double> observe_state(const TimeSeries& y, const TimeSeries& u, const LinearModel& model,
                                  const Window& window, double lambda,
                                  Anchor at = Anchor::right);

}  // namespace mfid
