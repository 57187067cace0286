#include "mfid/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfid/errors.hpp"

namespace mfid {

TimeSeries::TimeSeries(double t0, double dt, std::vector<double> values)
    : TimeSeries(t0, dt, std::move(values), 0, std::numeric_limits<std::size_t>::max()) {}

TimeSeries::TimeSeries(double t0, double dt, std::vector<double> values, std::size_t valid_begin,
                       std::size_t valid_end)
    : t0_(t0), dt_(dt), values_(std::move(values)), valid_begin_(valid_begin) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("TimeSeries: dt must be positive");
  if (!std::isfinite(t0)) throw ValidationError("TimeSeries: t0 must be finite");
  valid_end_ = std::min(valid_end, values_.size());
  if (valid_begin_ > valid_end_) valid_begin_ = valid_end_;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream os;
      os << "TimeSeries: non-finite sample at t=" << time(i);
      throw ValidationError(os.str());
    }
  }
}

bool TimeSeries::covers(double ta, double tb) const noexcept {
  if (valid_count() == 0) return false;
  const double eps = kGridTolerance * dt_;
  return ta >= valid_start_time() - eps && tb <= valid_end_time() + eps;
}

double TimeSeries::at(double t) const {
  if (!covers(t, t)) {
    std::ostringstream os;
    os << "invalid index: t=" << t << " outside valid range [" << valid_start_time() << ", "
       << valid_end_time() << "]";
    throw OutOfRangeError(os.str());
  }
  const double pos = position(t);
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < kGridTolerance) {
    auto i = static_cast<std::ptrdiff_t>(nearest);
    i = std::clamp<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(valid_begin_),
                                   static_cast<std::ptrdiff_t>(valid_end_) - 1);
    return values_[static_cast<std::size_t>(i)];
  }
  if (valid_count() < 4) {
    throw OutOfRangeError("TimeSeries::at: interpolation needs at least 4 valid samples");
  }
  // Stencil i-1..i+2 around the bracketing interval, pushed inward at the edges.
  auto base = static_cast<std::ptrdiff_t>(std::floor(pos)) - 1;
  base = std::clamp<std::ptrdiff_t>(base, static_cast<std::ptrdiff_t>(valid_begin_),
                                    static_cast<std::ptrdiff_t>(valid_end_) - 4);
  const double s = pos - static_cast<double>(base);
  const double* v = values_.data() + base;
  const double l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
  const double l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
  const double l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
  const double l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
  return l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3];
}

bool TimeSeries::grid_aligned_with(const TimeSeries& other) const noexcept {
  if (std::abs(dt_ - other.dt_) > 1e-12 * dt_) return false;
  const double offset = (other.t0_ - t0_) / dt_;
  return std::abs(offset - std::round(offset)) < kGridTolerance;
}

}  // namespace mfid
