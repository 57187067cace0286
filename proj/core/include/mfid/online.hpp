#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfid/least_squares.hpp"
#include "mfid/time_series.hpp"

namespace mfid {

// Online kernels are k_j(s) = s^j exp(-lambda s) / j!, s = t - tau, so that
// g_j = k_j (j < n) and f_j = k_{n+j-1} (j = 1 .. m).

/// Running integrals J_j(t) = int_0^t k_j(t - tau) x(tau) dtau.
struct IntegralBank {
  double lambda = 1.0;
  std::vector<double> J;

  IntegralBank() = default;
  IntegralBank(std::size_t count, double lambda);
  std::size_t size() const noexcept { return J.size(); }
};

/// One RK4 step of J_0' = x - lambda J_0, J_j' = J_{j-1} - lambda J_j, with x
/// linear between the samples x_begin and x_end taken dt apart.
void step_bank(IntegralBank& bank, double x_begin, double x_end, double dt);

/// Coefficients expressing I_{x^(i), k_j}(t) in terms of the bank integrals
/// J_k(t) of x and the boundary values x(t), x'(t), ..., x^(n-1)(t).
/// Contributions of the initial instant (decaying like exp(-lambda t)) are dropped.
struct ExpansionMatrices {
  int order = 0;
  int count = 0;
  double lambda = 0.0;
  std::vector<Eigen::MatrixXd> integral;  // [i](j, k), i = 0 .. order
  std::vector<Eigen::MatrixXd> boundary;  // [i](j, l), l = 0 .. order-1

  double M(int i, int j, int k) const { return integral[static_cast<std::size_t>(i)](j, k); }
  /// Index of f_j (j >= 1) among the bank kernels.
  int f_index(int j) const noexcept { return order + j - 1; }
};

ExpansionMatrices build_expansion_matrices(int order, double lambda, int count);

/// C, D at the current time with unknowns (a_0 .. a_{n-1}, b0[, b1]). The b1
/// column is minus the integral of the shifted input's derivative, so that
/// b1 / b0 estimates the residual delay h - h_hat.
/// Row j is stated for the unnormalized kernel s^q exp(-lambda s), q = n + j - 1,
/// i.e. scaled by q!, which fixes the units of the gradient gain.
RegressionSystem assemble_regression(const IntegralBank& y, const IntegralBank& u_shifted,
                                     const ExpansionMatrices& M, bool with_delay);

/// Step of A' = -gain C^t (C A - D) with C, D frozen over dt, integrated exactly
/// (stable for any gain). gain is diagonal.
Eigen::VectorXd gradient_step(const Eigen::VectorXd& A, const Eigen::MatrixXd& C,
                              const Eigen::VectorXd& D, const Eigen::VectorXd& gain, double dt);

struct DelayTracker {
  double gain = 0.4;              // lambda_h
  double activation_time = 0.0;   // T0
  double b0_floor = 1e-3;         // relative to the largest |A_i|
};

/// h' = gain * b1 / b0 for t > activation_time; returns 0 when frozen or when
/// |b0| falls below the floor.
double delay_rate(const DelayTracker& tracker, double t, double b0, double b1, double max_abs_estimate);

/// Euler update of h by delay_rate, clamped at 0.
double track_delay(const DelayTracker& tracker, double h, double t, double dt, double b0, double b1,
                   double max_abs_estimate);

/// RK4 step of the bank of u(t - h(t)) from t to t + dt, with h(tau) = h + h_rate (tau - t).
/// With drift correction every rate is scaled by (1 - h_rate), which makes the bank
/// follow F(t - h(t)) where F is the plain bank of u. Throws OutOfRangeError when
/// u does not reach back to t - h.
void step_shifted_input_integrals(IntegralBank& bank, const TimeSeries& u, double t, double h,
                                  double h_rate, double dt, bool drift_correction = true);

/// State (x(t), ..., x^(n-1)(t)) from the g_j boundary-term equations, given
/// coefficient estimates a (a_0 .. a_{n-1}), b0, b1 and the current shifted input u_shifted(t).
std::vector<double> observe_state_online(const IntegralBank& y, const IntegralBank& u_shifted,
                                         const ExpansionMatrices& M, const std::vector<double>& a,
                                         double b0, double b1, double u_now);

struct OnlineConfig {
  int order = 2;
  int kernels = 5;  // m, the number of f_j rows
  double lambda = 1.0;
  double gain = 1e-3;          // Lambda, scalar
  std::vector<double> gains;   // optional per-unknown Lambda (overrides gain)
  bool track_delay = false;
  DelayTracker tracker;
  double initial_delay = 0.0;
  bool drift_correction = true;
  std::vector<double> initial_estimate;  // a_0 .. a_{n-1}, b0[, b1]; zeros if empty

  void validate() const;
  int unknowns() const noexcept { return order + (track_delay ? 2 : 1); }
};

struct OnlineSnapshot {
  double t = 0.0;
  std::vector<double> a;
  double b0 = 0.0;
  double b1 = 0.0;
  double h = 0.0;
  std::vector<double> state;
  bool tracking = false;  // delay tracker active during the last step
};

/// Sequential estimator fed one output sample at a time on a fixed grid.
class OnlineEstimator {
 public:
  /// u must cover [t0 - max delay, end]; t0 is the time of the first output sample.
  OnlineEstimator(OnlineConfig config, TimeSeries u, double t0, double dt);

  /// Consume the next output sample (the first call only initializes).
  const OnlineSnapshot& push(double y);
  const OnlineSnapshot& snapshot() const noexcept { return snap_; }
  const OnlineConfig& config() const noexcept { return config_; }
  const ExpansionMatrices& expansion() const noexcept { return M_; }
  const IntegralBank& output_bank() const noexcept { return ybank_; }
  const IntegralBank& input_bank() const noexcept { return ubank_; }

 private:
  void refresh_snapshot(bool tracking);

  OnlineConfig config_;
  TimeSeries u_;
  double dt_;
  ExpansionMatrices M_;
  IntegralBank ybank_;
  IntegralBank ubank_;
  Eigen::VectorXd A_;
  Eigen::VectorXd gains_;
  double h_;
  double t_;
  double last_y_ = 0.0;
  bool started_ = false;
  OnlineSnapshot snap_;
};

using SnapshotSink = std::function<void(const OnlineSnapshot&)>;

/// Runs the estimator over every valid sample of y; sink sees each snapshot.
OnlineSnapshot run_online(const TimeSeries& y, const TimeSeries& u, const OnlineConfig& config,
                          const SnapshotSink& sink = {});

/// CSV log header and row: t,a0_hat,...,b0_hat,b1_hat,h_hat,x_hat,xdot_hat[,x2_hat...].
std::string online_log_header(int order);
void write_online_row(std::ostream& os, const OnlineSnapshot& s);

}  // namespace mfid
