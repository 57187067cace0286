#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfid {

/// Uniformly sampled real signal. Sample i sits at t0 + i*dt.
///
/// Samples outside [valid_begin, valid_end) exist only to keep the grid
/// aligned with the source series (e.g. after a shift) and must not be read
/// by estimators; every accessor that interpolates checks this range.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(double t0, double dt, std::vector<double> values);
  TimeSeries(double t0, double dt, std::vector<double> values, std::size_t valid_begin,
             std::size_t valid_end);

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }

  std::size_t valid_begin() const noexcept { return valid_begin_; }
  std::size_t valid_end() const noexcept { return valid_end_; }
  std::size_t valid_count() const noexcept { return valid_end_ - valid_begin_; }
  double valid_start_time() const noexcept { return time(valid_begin_); }
  double valid_end_time() const noexcept { return time(valid_end_ - 1); }

  /// True when [ta, tb] lies inside the valid time range (grid tolerance 1e-9*dt).
  bool covers(double ta, double tb) const noexcept;

  /// Value at an arbitrary time by 4-point cubic Lagrange interpolation over
  /// valid samples. Grid-aligned times return the stored sample exactly.
  /// Throws OutOfRangeError outside the valid range.
  double at(double t) const;

  /// Fractional grid position of t, i.e. (t - t0) / dt.
  double position(double t) const noexcept { return (t - t0_) / dt_; }

  /// True when both series share dt and their grids coincide up to an integer offset.
  bool grid_aligned_with(const TimeSeries& other) const noexcept;

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  std::vector<double> values_;
  std::size_t valid_begin_ = 0;
  std::size_t valid_end_ = 0;
};

/// Relative tolerance (in units of dt) used to decide that a time falls on a grid point.
inline constexpr double kGridTolerance = 1e-7;

}  // namespace mfid
