#include "mfid/window_integral.hpp"

#include <cmath>
#include <sstream>

#include "mfid/errors.hpp"

namespace mfid {

GridWindow snap_window(const TimeSeries& x, const Window& w) {
  if (!(w.t2 > w.t1)) throw ValidationError("window: T2 must exceed T1");
  if (!x.covers(w.t1, w.t2)) {
    std::ostringstream os;
    os << "invalid index: window [" << w.t1 << ", " << w.t2 << "] outside data range ["
       << x.valid_start_time() << ", " << x.valid_end_time() << "]";
    throw OutOfRangeError(os.str());
  }
  const double a = std::ceil(x.position(w.t1) - kGridTolerance);
  const double b = std::floor(x.position(w.t2) + kGridTolerance);
  GridWindow g;
  g.first = static_cast<std::size_t>(std::max(a, static_cast<double>(x.valid_begin())));
  g.last = static_cast<std::size_t>(std::min(b, static_cast<double>(x.valid_end() - 1)));
  if (g.last < g.first || g.samples() < kMinWindowSamples) {
    std::ostringstream os;
    os << "window [" << w.t1 << ", " << w.t2 << "] holds fewer than " << kMinWindowSamples
       << " samples";
    throw ValidationError(os.str());
  }
  g.t1 = x.time(g.first);
  g.t2 = x.time(g.last);
  return g;
}

std::vector<double> simpson_weights(std::size_t samples, double dt) {
  if (samples < 4) throw ValidationError("simpson_weights: need at least 4 samples");
  const std::size_t intervals = samples - 1;
  std::vector<double> w(samples, 0.0);
  const std::size_t simpson_intervals = intervals % 2 == 0 ? intervals : intervals - 3;
  for (std::size_t i = 0; i < simpson_intervals; i += 2) {
    w[i] += dt / 3.0;
    w[i + 1] += 4.0 * dt / 3.0;
    w[i + 2] += dt / 3.0;
  }
  if (simpson_intervals != intervals) {
    const std::size_t s = simpson_intervals;
    w[s] += 3.0 * dt / 8.0;
    w[s + 1] += 9.0 * dt / 8.0;
    w[s + 2] += 9.0 * dt / 8.0;
    w[s + 3] += 3.0 * dt / 8.0;
  }
  return w;
}

std::vector<double> kernel_weights(const ModulatingKernel& kernel, int derivative_order,
                                   std::size_t samples, double dt) {
  auto w = simpson_weights(samples, dt);
  const double L = static_cast<double>(samples - 1) * dt;
  for (std::size_t i = 0; i < samples; ++i) {
    const double theta = static_cast<double>(i) / static_cast<double>(samples - 1);
    w[i] *= kernel.derivative(derivative_order, theta, L);
  }
  return w;
}

double apply_weights(const TimeSeries& x, const GridWindow& g, std::span<const double> weights) {
  if (weights.size() != g.samples()) throw ValidationError("apply_weights: size mismatch");
  if (g.first < x.valid_begin() || g.last >= x.valid_end()) {
    throw OutOfRangeError("invalid index: window outside valid data");
  }
  const auto values = x.values().subspan(g.first, g.samples());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * values[i];
  return acc;
}

double window_integral(const TimeSeries& x, const ModulatingKernel& kernel, int derivative_order,
                       const Window& w) {
  const GridWindow g = snap_window(x, w);
  return apply_weights(x, g, kernel_weights(kernel, derivative_order, g.samples(), x.dt()));
}

}  // namespace mfid
