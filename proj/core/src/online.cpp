#include "mfid/online.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mfid/errors.hpp"

namespace mfid {

IntegralBank::IntegralBank(std::size_t count, double lambda_) : lambda(lambda_), J(count, 0.0) {
  if (count == 0) throw ValidationError("integral bank needs at least one accumulator");
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    throw ValidationError("forgetting rate must be positive");
  }
}

namespace {

// dJ/dt for input value v, scaled by `scale`.
void cascade_rate(const std::vector<double>& J, double lambda, double v, double scale,
                  std::vector<double>& out) {
  out[0] = scale * (v - lambda * J[0]);
  for (std::size_t j = 1; j < J.size(); ++j) out[j] = scale * (J[j - 1] - lambda * J[j]);
}

template <class Input>
void rk4_cascade(IntegralBank& bank, Input&& input, double scale, double dt) {
  const std::size_t n = bank.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double v0 = input(0.0), vh = input(0.5 * dt), v1 = input(dt);
  cascade_rate(bank.J, bank.lambda, v0, scale, k1);
  for (std::size_t j = 0; j < n; ++j) tmp[j] = bank.J[j] + 0.5 * dt * k1[j];
  cascade_rate(tmp, bank.lambda, vh, scale, k2);
  for (std::size_t j = 0; j < n; ++j) tmp[j] = bank.J[j] + 0.5 * dt * k2[j];
  cascade_rate(tmp, bank.lambda, vh, scale, k3);
  for (std::size_t j = 0; j < n; ++j) tmp[j] = bank.J[j] + dt * k3[j];
  cascade_rate(tmp, bank.lambda, v1, scale, k4);
  for (std::size_t j = 0; j < n; ++j) {
    bank.J[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
}

}  // namespace

void step_bank(IntegralBank& bank, double x_begin, double x_end, double dt) {
  if (!(dt > 0.0)) throw ValidationError("step_bank: dt must be positive");
  rk4_cascade(bank, [&](double s) { return x_begin + (x_end - x_begin) * (s / dt); }, 1.0, dt);
}

void step_shifted_input_integrals(IntegralBank& bank, const TimeSeries& u, double t, double h,
                                  double h_rate, double dt, bool drift_correction) {
  if (!(dt > 0.0)) throw ValidationError("step_shifted_input_integrals: dt must be positive");
  const double scale = drift_correction ? 1.0 - h_rate : 1.0;
  rk4_cascade(bank, [&](double s) { return u.at(t + s - (h + h_rate * s)); }, scale, dt);
}

ExpansionMatrices build_expansion_matrices(int order, double lambda, int count) {
  if (order < 1) throw ValidationError("expansion matrices need order >= 1");
  if (count < order + 1) throw ValidationError("expansion matrices need count > order");
  ExpansionMatrices M;
  M.order = order;
  M.count = count;
  M.lambda = lambda;
  M.integral.assign(static_cast<std::size_t>(order) + 1, Eigen::MatrixXd::Zero(count, count));
  M.boundary.assign(static_cast<std::size_t>(order) + 1, Eigen::MatrixXd::Zero(count, order));
  M.integral[0].setIdentity();
  // I_{x^(i), k_j} = I_{x^(i-1), k_{j-1}} - lambda I_{x^(i-1), k_j} + [j = 0] x^(i-1)(t)
  for (int i = 1; i <= order; ++i) {
    auto& Mi = M.integral[static_cast<std::size_t>(i)];
    auto& Bi = M.boundary[static_cast<std::size_t>(i)];
    const auto& Mp = M.integral[static_cast<std::size_t>(i) - 1];
    const auto& Bp = M.boundary[static_cast<std::size_t>(i) - 1];
    for (int j = 0; j < count; ++j) {
      Mi.row(j) = -lambda * Mp.row(j);
      Bi.row(j) = -lambda * Bp.row(j);
      if (j > 0) {
        Mi.row(j) += Mp.row(j - 1);
        Bi.row(j) += Bp.row(j - 1);
      } else {
        Bi(0, i - 1) += 1.0;
      }
    }
  }
  return M;
}

RegressionSystem assemble_regression(const IntegralBank& y, const IntegralBank& u_shifted,
                                     const ExpansionMatrices& M, bool with_delay) {
  const int n = M.order;
  const int m = M.count - n;
  if (static_cast<int>(y.size()) != M.count || static_cast<int>(u_shifted.size()) != M.count) {
    throw ValidationError("assemble_regression: bank size does not match the expansion matrices");
  }
  const Eigen::Map<const Eigen::VectorXd> Jy(y.J.data(), M.count);
  const Eigen::Map<const Eigen::VectorXd> Ju(u_shifted.J.data(), M.count);
  const int cols = n + (with_delay ? 2 : 1);
  RegressionSystem sys;
  sys.C = Eigen::MatrixXd::Zero(m, cols);
  sys.D = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) sys.unknowns.push_back("a" + std::to_string(i));
  sys.unknowns.push_back("b0");
  if (with_delay) sys.unknowns.push_back("b1");
  for (int j = 1; j <= m; ++j) {
    const int q = M.f_index(j);
    const int r = j - 1;
    for (int i = 0; i < n; ++i) sys.C(r, i) = M.integral[static_cast<std::size_t>(i)].row(q).dot(Jy);
    sys.D(r) = M.integral[static_cast<std::size_t>(n)].row(q).dot(Jy);
    sys.C(r, n) = Ju(q);
    if (with_delay) sys.C(r, n + 1) = -(Ju(q - 1) - u_shifted.lambda * Ju(q));
    double scale = 1.0;
    for (int k = 2; k <= q; ++k) scale *= k;
    sys.C.row(r) *= scale;
    sys.D(r) *= scale;
  }
  return sys;
}

Eigen::VectorXd gradient_step(const Eigen::VectorXd& A, const Eigen::MatrixXd& C,
                              const Eigen::VectorXd& D, const Eigen::VectorXd& gain, double dt) {
  // With z = gain^{-1/2} A the flow is z' = -S z + r, S symmetric positive
  // semi-definite, and is integrated exactly over dt.
  const Eigen::VectorXd root = gain.cwiseSqrt();
  const Eigen::MatrixXd S = root.asDiagonal() * (C.transpose() * C) * root.asDiagonal();
  const Eigen::VectorXd force = root.cwiseProduct(C.transpose() * (D - C * A));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const Eigen::VectorXd sigma = eig.eigenvalues().cwiseMax(0.0);
  Eigen::VectorXd phi(sigma.size());
  for (Eigen::Index k = 0; k < sigma.size(); ++k) {
    const double x = sigma(k) * dt;
    phi(k) = x < 1e-8 ? dt * (1.0 - 0.5 * x) : -std::expm1(-x) / sigma(k);
  }
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::VectorXd dz = V * phi.cwiseProduct(V.transpose() * force);
  return A + root.cwiseProduct(dz);
}

double delay_rate(const DelayTracker& tracker, double t, double b0, double b1,
                  double max_abs_estimate) {
  if (t <= tracker.activation_time) return 0.0;
  if (std::abs(b0) < tracker.b0_floor * max_abs_estimate || b0 == 0.0) return 0.0;
  return tracker.gain * b1 / b0;
}

double track_delay(const DelayTracker& tracker, double h, double t, double dt, double b0, double b1,
                   double max_abs_estimate) {
  return std::max(0.0, h + dt * delay_rate(tracker, t, b0, b1, max_abs_estimate));
}

std::vector<double> observe_state_online(const IntegralBank& y, const IntegralBank& u_shifted,
                                         const ExpansionMatrices& M, const std::vector<double>& a,
                                         double b0, double b1, double u_now) {
  const int n = M.order;
  if (static_cast<int>(a.size()) != n) {
    throw ValidationError("observe_state_online: coefficient count does not match the order");
  }
  const Eigen::Map<const Eigen::VectorXd> Jy(y.J.data(), M.count);
  const double lambda = u_shifted.lambda;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (int j = 0; j < n; ++j) {
    double known = -M.integral[static_cast<std::size_t>(n)].row(j).dot(Jy);
    B.row(j) = -M.boundary[static_cast<std::size_t>(n)].row(j);
    for (int i = 0; i < n; ++i) {
      const double ai = a[static_cast<std::size_t>(i)];
      known += ai * M.integral[static_cast<std::size_t>(i)].row(j).dot(Jy);
      B.row(j) += ai * M.boundary[static_cast<std::size_t>(i)].row(j);
    }
    const double du = (j > 0 ? u_shifted.J[static_cast<std::size_t>(j) - 1] : u_now) -
                      lambda * u_shifted.J[static_cast<std::size_t>(j)];
    known += b0 * u_shifted.J[static_cast<std::size_t>(j)] - b1 * du;
    rhs(j) = -known;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  if (!lu.isInvertible()) {
    throw KernelContractError("observe_state_online: boundary system is singular");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  return {x.data(), x.data() + n};
}

void OnlineConfig::validate() const {
  if (order < 1) throw ValidationError("online: order must be >= 1");
  if (kernels < unknowns()) {
    std::ostringstream os;
    os << "online: need at least " << unknowns() << " kernels for " << unknowns() << " unknowns";
    throw ValidationError(os.str());
  }
  if (!(lambda > 0.0)) throw ValidationError("online: lambda must be positive");
  if (gains.empty() ? !(gain > 0.0) : static_cast<int>(gains.size()) != unknowns()) {
    throw ValidationError("online: gain must be positive (one value or one per unknown)");
  }
  for (double g : gains) {
    if (!(g > 0.0)) throw ValidationError("online: gains must be positive");
  }
  if (!initial_estimate.empty() && static_cast<int>(initial_estimate.size()) != unknowns()) {
    throw ValidationError("online: initial estimate has the wrong size");
  }
  if (initial_delay < 0.0) throw ValidationError("online: initial delay must be >= 0");
  if (tracker.gain < 0.0 || tracker.b0_floor < 0.0) {
    throw ValidationError("online: delay tracker gain and floor must be >= 0");
  }
}

OnlineEstimator::OnlineEstimator(OnlineConfig config, TimeSeries u, double t0, double dt)
    : config_(std::move(config)),
      u_(std::move(u)),
      dt_(dt),
      h_(config_.initial_delay),
      t_(t0) {
  config_.validate();
  if (!(dt > 0.0)) throw ValidationError("online: dt must be positive");
  const int count = config_.order + config_.kernels;
  M_ = build_expansion_matrices(config_.order, config_.lambda, count);
  ybank_ = IntegralBank(static_cast<std::size_t>(count), config_.lambda);
  ubank_ = IntegralBank(static_cast<std::size_t>(count), config_.lambda);
  const int p = config_.unknowns();
  A_ = Eigen::VectorXd::Zero(p);
  if (!config_.initial_estimate.empty()) {
    A_ = Eigen::Map<const Eigen::VectorXd>(config_.initial_estimate.data(), p);
  }
  gains_ = config_.gains.empty() ? Eigen::VectorXd::Constant(p, config_.gain)
                                 : Eigen::Map<const Eigen::VectorXd>(config_.gains.data(), p).eval();
  snap_.t = t0;
  snap_.h = h_;
}

void OnlineEstimator::refresh_snapshot(bool tracking) {
  const int n = config_.order;
  snap_.t = t_;
  snap_.a.assign(A_.data(), A_.data() + n);
  snap_.b0 = A_(n);
  snap_.b1 = config_.track_delay ? A_(n + 1) : 0.0;
  snap_.h = h_;
  snap_.tracking = tracking;
  snap_.state = observe_state_online(ybank_, ubank_, M_, snap_.a, snap_.b0, snap_.b1,
                                     u_.at(t_ - h_));
}

const OnlineSnapshot& OnlineEstimator::push(double y) {
  if (!std::isfinite(y)) throw ValidationError("online: non-finite output sample");
  if (!started_) {
    started_ = true;
    last_y_ = y;
    refresh_snapshot(false);
    return snap_;
  }
  const int n = config_.order;
  double rate = 0.0;
  if (config_.track_delay) {
    rate = delay_rate(config_.tracker, t_, A_(n), A_(n + 1), A_.cwiseAbs().maxCoeff());
  }
  step_bank(ybank_, last_y_, y, dt_);
  step_shifted_input_integrals(ubank_, u_, t_, h_, rate, dt_, config_.drift_correction);
  h_ = std::max(0.0, h_ + dt_ * rate);
  t_ += dt_;
  last_y_ = y;
  const RegressionSystem sys = assemble_regression(ybank_, ubank_, M_, config_.track_delay);
  A_ = gradient_step(A_, sys.C, sys.D, gains_, dt_);
  if (!A_.allFinite()) throw DivergenceError("online: estimates became non-finite");
  refresh_snapshot(rate != 0.0);
  return snap_;
}

OnlineSnapshot run_online(const TimeSeries& y, const TimeSeries& u, const OnlineConfig& config,
                          const SnapshotSink& sink) {
  if (y.valid_count() < 2) throw ValidationError("online: need at least two output samples");
  OnlineEstimator est(config, u, y.valid_start_time(), y.dt());
  for (std::size_t i = y.valid_begin(); i < y.valid_end(); ++i) {
    const auto& s = est.push(y[i]);
    if (sink) sink(s);
  }
  return est.snapshot();
}

std::string online_log_header(int order) {
  std::ostringstream os;
  os << "t";
  for (int i = 0; i < order; ++i) os << ",a" << i << "_hat";
  os << ",b0_hat,b1_hat,h_hat,x_hat";
  if (order > 1) os << ",xdot_hat";
  for (int i = 2; i < order; ++i) os << ",x" << i << "_hat";
  return os.str();
}

void write_online_row(std::ostream& os, const OnlineSnapshot& s) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(12) << s.t;
  for (double a : s.a) os << ',' << a;
  os << ',' << s.b0 << ',' << s.b1 << ',' << s.h;
  for (double x : s.state) os << ',' << x;
  os << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace mfid
