#include "mfid/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mfid/errors.hpp"

namespace mfid {

// ---------------------------------------------------------------------------
// Profile

Profile::Profile(std::vector<std::pair<double, double>> breakpoints, double tail_slope)
    : breakpoints_(std::move(breakpoints)), tail_slope_(tail_slope) {}

Profile Profile::constant(double value) { return Profile({{0.0, value}}, 0.0); }

Profile Profile::ramp_after(double value, double start, double slope) {
  return Profile({{start, value}}, slope);
}

Profile Profile::piecewise_linear(std::vector<std::pair<double, double>> breakpoints) {
  if (breakpoints.empty()) throw ValidationError("Profile: at least one breakpoint required");
  std::sort(breakpoints.begin(), breakpoints.end());
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (breakpoints[i].first == breakpoints[i - 1].first) {
      throw ValidationError("Profile: duplicate breakpoint time");
    }
  }
  return Profile(std::move(breakpoints), 0.0);
}

double Profile::operator()(double t) const {
  const auto& first = breakpoints_.front();
  const auto& last = breakpoints_.back();
  if (t <= first.first) return first.second;
  if (t >= last.first) return last.second + tail_slope_ * (t - last.first);
  auto hi = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t,
                             [](double v, const auto& bp) { return v < bp.first; });
  auto lo = hi - 1;
  const double w = (t - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

bool Profile::is_constant() const noexcept {
  if (tail_slope_ != 0.0) return false;
  return std::all_of(breakpoints_.begin(), breakpoints_.end(),
                     [&](const auto& bp) { return bp.second == breakpoints_.front().second; });
}

double Profile::min_value() const noexcept {
  if (tail_slope_ < 0.0) return -std::numeric_limits<double>::infinity();
  double m = breakpoints_.front().second;
  for (const auto& bp : breakpoints_) m = std::min(m, bp.second);
  return m;
}

double Profile::max_value() const noexcept {
  if (tail_slope_ > 0.0) return std::numeric_limits<double>::infinity();
  double m = breakpoints_.front().second;
  for (const auto& bp : breakpoints_) m = std::max(m, bp.second);
  return m;
}

void SystemSpec::validate() const {
  if (order < 1) throw ValidationError("SystemSpec: order must be >= 1");
  if (static_cast<int>(coefficients.size()) != order) {
    throw ValidationError("SystemSpec: expected one coefficient profile per derivative below the order");
  }
  if (static_cast<int>(initial_state.size()) != order) {
    throw ValidationError("SystemSpec: initial state must hold x(0) .. x^(n-1)(0)");
  }
  if (state_delay < 0.0) throw ValidationError("SystemSpec: state delay must be >= 0");
  if (input_delay.min_value() < 0.0) throw ValidationError("SystemSpec: input delay must be >= 0");
}

// ---------------------------------------------------------------------------
// Sampling and noise

TimeSeries sample_expression(const ScalarFunction& expr, double t0, double dt, std::size_t count) {
  if (!(dt > 0.0)) throw ValidationError("sample_expression: dt must be positive");
  if (count < 1) throw ValidationError("sample_expression: count must be >= 1");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    values[i] = expr(t);
    if (!std::isfinite(values[i])) {
      std::ostringstream os;
      os << "sample_expression: non-finite value at t=" << t;
      throw SamplingError(os.str());
    }
  }
  return TimeSeries(t0, dt, std::move(values));
}

TimeSeries add_noise(const TimeSeries& ts, const NoiseSpec& spec) {
  if (spec.sigma < 0.0 || !std::isfinite(spec.sigma)) {
    throw ValidationError("add_noise: sigma must be finite and >= 0");
  }
  std::vector<double> values(ts.values().begin(), ts.values().end());
  if (spec.sigma > 0.0) {
    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.sigma);
    for (double& v : values) v += noise(gen);
  }
  return TimeSeries(ts.t0(), ts.dt(), std::move(values), ts.valid_begin(), ts.valid_end());
}

TimeSeries shift(const TimeSeries& ts, double delay) {
  if (!std::isfinite(delay)) throw ValidationError("shift: delay must be finite");
  const std::size_t n = ts.size();
  std::vector<double> values(n, 0.0);
  if (ts.valid_count() == 0) return TimeSeries(ts.t0(), ts.dt(), std::move(values), 0, 0);

  const double lo_pos = ts.position(ts.valid_start_time() + delay);
  const double hi_pos = ts.position(ts.valid_end_time() + delay);
  const double lo = std::max(0.0, std::ceil(lo_pos - kGridTolerance));
  const double hi = std::min(static_cast<double>(n) - 1.0, std::floor(hi_pos + kGridTolerance));
  if (hi < lo) return TimeSeries(ts.t0(), ts.dt(), std::move(values), 0, 0);

  const auto begin = static_cast<std::size_t>(lo);
  const auto end = static_cast<std::size_t>(hi) + 1;
  for (std::size_t i = begin; i < end; ++i) values[i] = ts.at(ts.time(i) - delay);
  return TimeSeries(ts.t0(), ts.dt(), std::move(values), begin, end);
}

TimeSeries differentiate(const TimeSeries& ts) {
  const std::size_t n = ts.size();
  std::vector<double> out(n, 0.0);
  if (ts.valid_count() < 5) return TimeSeries(ts.t0(), ts.dt(), std::move(out), 0, 0);
  const std::size_t begin = ts.valid_begin() + 2;
  const std::size_t end = ts.valid_end() - 2;
  const double scale = 1.0 / (12.0 * ts.dt());
  for (std::size_t i = begin; i < end; ++i) {
    out[i] = (ts[i - 2] - 8.0 * ts[i - 1] + 8.0 * ts[i + 1] - ts[i + 2]) * scale;
  }
  return TimeSeries(ts.t0(), ts.dt(), std::move(out), begin, end);
}

// ---------------------------------------------------------------------------
// Forward simulation

namespace {

constexpr double kOverflowGuard = 1e12;

class DelaySimulator {
 public:
  DelaySimulator(const SystemSpec& spec, const TimeSeries& u, double dt, std::size_t steps)
      : spec_(spec), u_(u), dt_(dt), n_(spec.order) {
    x_.reserve(steps + 1);
    xdot_.reserve(steps + 1);
  }

  // Highest derivative for the given state at time t.
  double highest_derivative(double t, const std::vector<double>& state) const {
    double acc = spec_.gain * u_.at(t - spec_.input_delay(t));
    for (int i = 0; i < n_; ++i) {
      const double xi = (i == 0 && spec_.state_delay > 0.0) ? delayed_x(t - spec_.state_delay)
                                                            : state[static_cast<std::size_t>(i)];
      acc += spec_.coefficients[static_cast<std::size_t>(i)](t) * xi;
    }
    return acc;
  }

  void rhs(double t, const std::vector<double>& state, std::vector<double>& out) const {
    for (int i = 0; i + 1 < n_; ++i) out[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i) + 1];
    out[static_cast<std::size_t>(n_ - 1)] = highest_derivative(t, state);
  }

  void record(double t, const std::vector<double>& state) {
    x_.push_back(state[0]);
    xdot_.push_back(n_ >= 2 ? state[1] : highest_derivative(t, state));
  }

 private:
  double delayed_x(double tau) const {
    if (tau < 0.0) {
      return spec_.history ? spec_.history(tau) : spec_.initial_state.front();
    }
    // Cubic Hermite between the bracketing stored grid points.
    const double pos = tau / dt_;
    auto k = static_cast<std::size_t>(std::floor(pos));
    if (k + 1 >= x_.size()) k = x_.size() >= 2 ? x_.size() - 2 : 0;
    if (x_.size() < 2) return x_.empty() ? spec_.initial_state.front() : x_.front();
    const double s = pos - static_cast<double>(k);
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * x_[k] + h10 * dt_ * xdot_[k] + h01 * x_[k + 1] + h11 * dt_ * xdot_[k + 1];
  }

  const SystemSpec& spec_;
  const TimeSeries& u_;
  double dt_;
  int n_;
  std::vector<double> x_;
  std::vector<double> xdot_;
};

}  // namespace

std::vector<TimeSeries> simulate(const SystemSpec& spec, const TimeSeries& u, double t_end,
                                 double dt) {
  spec.validate();
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ValidationError("simulate: dt and t_end must be positive");
  if (spec.state_delay > 0.0 && spec.state_delay < dt * (1.0 - 1e-9)) {
    throw CapabilityError("simulate: a nonzero state delay must be at least one step");
  }
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));

  // Every stage time t_k and t_k + dt/2 needs u(t - h(t)).
  double need_lo = std::numeric_limits<double>::infinity();
  double need_hi = -need_lo;
  for (std::size_t k = 0; k <= 2 * steps; ++k) {
    const double t = 0.5 * dt * static_cast<double>(k);
    const double s = t - spec.input_delay(t);
    need_lo = std::min(need_lo, s);
    need_hi = std::max(need_hi, s);
  }
  if (!u.covers(need_lo, need_hi)) {
    std::ostringstream os;
    os << "simulate: input covers [" << u.valid_start_time() << ", " << u.valid_end_time()
       << "] but [" << need_lo << ", " << need_hi << "] is required";
    throw OutOfRangeError(os.str());
  }

  const auto n = static_cast<std::size_t>(spec.order);
  DelaySimulator sim(spec, u, dt, steps);
  std::vector<std::vector<double>> out(n, std::vector<double>(steps + 1));
  std::vector<double> state = spec.initial_state;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  auto store = [&](std::size_t step) {
    for (std::size_t i = 0; i < n; ++i) out[i][step] = state[i];
  };
  sim.record(0.0, state);
  store(0);
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = dt * static_cast<double>(step);
    sim.rhs(t, state, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
    sim.rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
    sim.rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
    sim.rhs(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (double v : state) {
      if (!std::isfinite(v) || std::abs(v) > kOverflowGuard) {
        std::ostringstream os;
        os << "simulate: trajectory diverged at t=" << t + dt;
        throw DivergenceError(os.str());
      }
    }
    sim.record(t + dt, state);
    store(step + 1);
  }

  std::vector<TimeSeries> result;
  result.reserve(n);
  for (auto& v : out) result.emplace_back(0.0, dt, std::move(v));
  return result;
}

TimeSeries invert_for_input(const SystemSpec& spec, const TimeSeries& x) {
  spec.validate();
  if (spec.gain == 0.0) throw NonInvertibleError("invert_for_input: gain b is zero");
  if (!spec.input_delay.is_constant()) {
    throw CapabilityError("invert_for_input: time-varying input delay is not supported");
  }
  const double h = spec.input_delay(0.0);
  const auto n = static_cast<std::size_t>(spec.order);

  std::vector<TimeSeries> d{x};
  for (std::size_t k = 1; k <= n; ++k) d.push_back(differentiate(d.back()));
  const TimeSeries& top = d.back();

  std::size_t begin = top.valid_begin();
  const std::size_t end = top.valid_end();
  if (spec.state_delay > 0.0) {
    while (begin < end && !x.covers(x.time(begin) - spec.state_delay, x.time(begin))) ++begin;
  }

  std::vector<double> values(x.size(), 0.0);
  for (std::size_t i = begin; i < end; ++i) {
    const double t = x.time(i);
    double acc = top[i];
    for (std::size_t k = 0; k < n; ++k) {
      const double xk = (k == 0 && spec.state_delay > 0.0) ? x.at(t - spec.state_delay) : d[k][i];
      acc -= spec.coefficients[k](t) * xk;
    }
    values[i] = acc / spec.gain;
  }
  return TimeSeries(x.t0() - h, x.dt(), std::move(values), begin, std::max(begin, end));
}

}  // namespace mfid
