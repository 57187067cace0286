#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfid/kernels.hpp"
#include "mfid/time_series.hpp"

namespace mfid {

struct Window {
  double t1 = 0.0;
  double t2 = 0.0;
  double length() const noexcept { return t2 - t1; }
};

/// A window snapped inward onto a series' sample grid.
struct GridWindow {
  std::size_t first = 0;  // index of the sample at t1
  std::size_t last = 0;   // index of the sample at t2 (inclusive)
  double t1 = 0.0;
  double t2 = 0.0;
  double length() const noexcept { return t2 - t1; }
  std::size_t samples() const noexcept { return last - first + 1; }
};

inline constexpr std::size_t kMinWindowSamples = 8;

/// Snaps [t1, t2] inward to grid points (ceil t1, floor t2). Throws
/// OutOfRangeError when the window leaves the valid range of x and
/// ValidationError when fewer than kMinWindowSamples samples remain.
GridWindow snap_window(const TimeSeries& x, const Window& w);

/// Composite Simpson weights for `samples` equally spaced points (3/8 rule on
/// the last three intervals when the interval count is odd).
std::vector<double> simpson_weights(std::size_t samples, double dt);

/// Quadrature weights multiplied by the kernel derivative at each sample of a
/// window with `samples` points; dotting with the data gives the integral.
std::vector<double> kernel_weights(const ModulatingKernel& kernel, int derivative_order,
                                   std::size_t samples, double dt);

double apply_weights(const TimeSeries& x, const GridWindow& g, std::span<const double> weights);

/// Integral over the snapped window of f^(order)((t - T1)/L) x(t) dt, where
/// the derivative is taken with respect to normalized time.
double window_integral(const TimeSeries& x, const ModulatingKernel& kernel, int derivative_order,
                       const Window& w);

}  // namespace mfid
