#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mfid/time_series.hpp"

namespace mfid {

using ScalarFunction = std::function<double(double)>;

/// Piecewise-linear function of time given by breakpoints, held constant
/// outside the first and last breakpoint.
class Profile {
 public:
  Profile() : Profile(constant(0.0)) {}

  static Profile constant(double value);
  /// value for t < start, then value + slope * (t - start).
  static Profile ramp_after(double value, double start, double slope);
  static Profile piecewise_linear(std::vector<std::pair<double, double>> breakpoints);

  double operator()(double t) const;
  bool is_constant() const noexcept;
  double min_value() const noexcept;
  double max_value() const noexcept;

 private:
  explicit Profile(std::vector<std::pair<double, double>> breakpoints, double tail_slope);

  std::vector<std::pair<double, double>> breakpoints_;
  double tail_slope_ = 0.0;  // slope continued after the last breakpoint
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// x^(n)(t) = sum_i a_i(t) x^(i)(t) + b u(t - h(t)), with optionally the
/// a_0 term evaluated at t - state_delay (x'' = a0 x(t-h1) + a1 x' + b u(t-h2)).
struct SystemSpec {
  int order = 1;
  std::vector<Profile> coefficients;  // a_0 .. a_{n-1}
  double gain = 0.0;
  Profile input_delay = Profile::constant(0.0);
  double state_delay = 0.0;
  std::vector<double> initial_state;  // x(0) .. x^(n-1)(0)
  /// x on [-state_delay, 0]; constant extension of x(0) when empty.
  ScalarFunction history;

  void validate() const;
};

TimeSeries sample_expression(const ScalarFunction& expr, double t0, double dt, std::size_t count);

TimeSeries add_noise(const TimeSeries& ts, const NoiseSpec& spec);

/// Output on the same grid as ts; sample at t approximates ts(t - delay).
/// Samples whose source time falls outside ts's valid range are excluded
/// from the valid range of the result.
TimeSeries shift(const TimeSeries& ts, double delay);

/// Fixed-step RK4 integration of the companion system from t = 0 to t_end.
/// Returns x, x', ..., x^(n-1) on the grid k*dt.
std::vector<TimeSeries> simulate(const SystemSpec& spec, const TimeSeries& u, double t_end,
                                 double dt);

/// Reconstructs the input that makes x a solution of spec. Derivatives of x
/// are taken with 5-point central stencils; the result lives on x's grid
/// moved back by the (constant) input delay, so no interpolation of x is
/// needed except for the state-delay term.
TimeSeries invert_for_input(const SystemSpec& spec, const TimeSeries& x);

/// Derivative of a sampled signal by the 5-point central stencil; loses two
/// valid samples at each end.
TimeSeries differentiate(const TimeSeries& ts);

}  // namespace mfid
