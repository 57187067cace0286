#include "mfid/batch.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "mfid/errors.hpp"
#include "mfid/signals.hpp"

namespace mfid {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Weighted kernel samples keyed by (kernel, derivative order, sample count, dt).
class WeightCache {
 public:
  const std::vector<double>& get(const ModulatingKernel& kernel, int order, std::size_t samples,
                                 double dt) {
    auto key = std::make_tuple(kernel.name(), order, samples, dt);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, kernel_weights(kernel, order, samples, dt)).first;
    }
    return it->second;
  }

 private:
  std::map<std::tuple<std::string, int, std::size_t, double>, std::vector<double>> cache_;
};

// Snaps the window on both series and checks that they land on the same instants.
std::pair<GridWindow, GridWindow> snap_pair(const TimeSeries& y, const TimeSeries& u,
                                            const Window& w) {
  const GridWindow gy = snap_window(y, w);
  const GridWindow gu = snap_window(u, w);
  if (gy.samples() != gu.samples() || std::abs(gy.t1 - gu.t1) > kGridTolerance * y.dt()) {
    throw ValidationError("output and input series are not sampled on a common grid");
  }
  return {gy, gu};
}

void require_two_sided(const ModulatingKernel& k, int order) {
  if (k.family() == KernelFamily::exp_poly) {
    throw KernelContractError("kernel " + k.name() +
                              " does not vanish at both ends of a finite window");
  }
  if (k.annihilation_order() < order) {
    std::ostringstream os;
    os << "kernel " << k.name() << " annihilates " << k.annihilation_order()
       << " boundary derivatives but " << order << " are required";
    throw KernelContractError(os.str());
  }
}

std::vector<std::string> coefficient_names(int order) {
  std::vector<std::string> names;
  for (int i = 0; i < order; ++i) names.push_back("a" + std::to_string(i));
  return names;
}

// Fills the a_i columns and D for one row.
void fill_output_terms(RegressionSystem& sys, Eigen::Index row, const TimeSeries& y,
                       const GridWindow& g, const ModulatingKernel& k, int order,
                       WeightCache& cache) {
  const double L = g.length();
  for (int i = 0; i <= order; ++i) {
    const double integral = apply_weights(y, g, cache.get(k, i, g.samples(), y.dt()));
    const double value = ((i % 2) ? -1.0 : 1.0) * std::pow(L, -i) * integral;
    if (i < order) {
      sys.C(row, i) = value;
    } else {
      sys.D(row) = value;
    }
  }
}

RegressionSystem taylor_system(const TimeSeries& y, const TimeSeries& u_shifted,
                               const std::vector<ModulatingKernel>& kernels,
                               const WindowSet& windows, int order, int truncation,
                               WeightCache& cache) {
  if (order < 1) throw ValidationError("system order must be >= 1");
  if (truncation < 0) throw ValidationError("Taylor truncation order must be >= 0");
  if (kernels.empty()) throw ValidationError("at least one kernel is required");
  if (windows.windows.empty()) throw ValidationError("window set is empty");
  for (const auto& k : kernels) require_two_sided(k, std::max(order, truncation));

  const auto rows = static_cast<Eigen::Index>(windows.windows.size() * kernels.size());
  const Eigen::Index cols = order + truncation + 1;
  RegressionSystem sys;
  sys.C = Eigen::MatrixXd::Zero(rows, cols);
  sys.D = Eigen::VectorXd::Zero(rows);
  sys.unknowns = coefficient_names(order);
  for (int l = 0; l <= truncation; ++l) sys.unknowns.push_back("b" + std::to_string(l));

  Eigen::Index row = 0;
  for (const auto& w : windows.windows) {
    const auto [gy, gu] = snap_pair(y, u_shifted, w);
    const double L = gy.length();
    for (const auto& k : kernels) {
      fill_output_terms(sys, row, y, gy, k, order, cache);
      for (int l = 0; l <= truncation; ++l) {
        const double integral = apply_weights(u_shifted, gu, cache.get(k, l, gu.samples(), y.dt()));
        sys.C(row, order + l) = std::pow(L, -l) / factorial(l) * integral;
      }
      ++row;
    }
  }
  return sys;
}

RegressionSystem sin2_system(const TimeSeries& y, const TimeSeries& u_shifted,
                             const WindowSet& windows, int order, WeightCache& cache) {
  if (order < 1 || order > 2) {
    throw KernelContractError("the sin^2 kernel annihilates two derivatives; order must be 1 or 2");
  }
  if (windows.windows.empty()) throw ValidationError("window set is empty");
  if (!windows.uniform_length()) {
    throw ValidationError("the sin^2 shift identity needs windows of one common length");
  }
  const auto f = ModulatingKernel::sin_pow(2);
  const auto c = ModulatingKernel::cosine(1);
  const auto s = ModulatingKernel::sine(1);

  const auto rows = static_cast<Eigen::Index>(windows.windows.size());
  RegressionSystem sys;
  sys.C = Eigen::MatrixXd::Zero(rows, order + 3);
  sys.D = Eigen::VectorXd::Zero(rows);
  sys.unknowns = coefficient_names(order);
  for (const char* name : {"b0", "b1", "b2"}) sys.unknowns.emplace_back(name);

  Eigen::Index row = 0;
  for (const auto& w : windows.windows) {
    const auto [gy, gu] = snap_pair(y, u_shifted, w);
    fill_output_terms(sys, row, y, gy, f, order, cache);
    sys.C(row, order) = apply_weights(u_shifted, gu, cache.get(f, 0, gu.samples(), y.dt()));
    sys.C(row, order + 1) = apply_weights(u_shifted, gu, cache.get(c, 0, gu.samples(), y.dt()));
    sys.C(row, order + 2) = apply_weights(u_shifted, gu, cache.get(s, 0, gu.samples(), y.dt()));
    ++row;
  }
  return sys;
}

double default_tolerance(double configured, const WindowSet& windows) {
  return configured > 0.0 ? configured : 1e-6 * windows.min_length();
}

double snapped_length(const TimeSeries& y, const WindowSet& windows) {
  return snap_window(y, windows.windows.front()).length();
}

}  // namespace

// ---------------------------------------------------------------------------

WindowSet WindowSet::regular(double first_t1, double length, double step, int count) {
  if (!(length > 0.0) || count < 1) throw ValidationError("window set: length > 0 and count >= 1 required");
  WindowSet ws;
  for (int k = 0; k < count; ++k) {
    const double t1 = first_t1 + step * k;
    ws.windows.push_back({t1, t1 + length});
  }
  return ws;
}

double WindowSet::min_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& w : windows) m = std::min(m, w.length());
  return m;
}

bool WindowSet::uniform_length() const {
  for (const auto& w : windows) {
    if (std::abs(w.length() - windows.front().length()) > 1e-9 * windows.front().length()) return false;
  }
  return true;
}

std::string to_string(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::converged: return "converged";
    case EstimateStatus::max_iterations: return "max-iterations";
    case EstimateStatus::diverged: return "diverged";
    case EstimateStatus::no_improvement: return "no-improvement";
  }
  return "unknown";
}

LinearModel model_of(const EstimateReport& report) {
  return LinearModel{report.a, report.b, report.h.empty() ? 0.0 : report.h.back()};
}

RegressionSystem build_delay_free_system(const TimeSeries& y, const TimeSeries& u,
                                         const std::vector<ModulatingKernel>& kernels,
                                         const WindowSet& windows, int order) {
  WeightCache cache;
  return taylor_system(y, u, kernels, windows, order, 0, cache);
}

RegressionSystem build_delay_free_system(const TimeSeries& y, const TimeSeries& u,
                                         const std::vector<ModulatingKernel>& kernels,
                                         const Window& window, int order) {
  return build_delay_free_system(y, u, kernels, WindowSet{{window}}, order);
}

RegressionSystem build_taylor_delay_system(const TimeSeries& y, const TimeSeries& u_shifted,
                                           const std::vector<ModulatingKernel>& kernels,
                                           const WindowSet& windows, int order, int truncation) {
  if (truncation < 1) throw ValidationError("Taylor delay system needs truncation order >= 1");
  WeightCache cache;
  return taylor_system(y, u_shifted, kernels, windows, order, truncation, cache);
}

RegressionSystem build_sin2_delay_system(const TimeSeries& y, const TimeSeries& u_shifted,
                                         const WindowSet& windows, int order) {
  WeightCache cache;
  return sin2_system(y, u_shifted, windows, order, cache);
}

std::pair<double, double> sin2_shift_coefficients(double d) {
  return {0.5 * (1.0 - std::cos(kTwoPi * d)), 0.5 * std::sin(kTwoPi * d)};
}

double taylor_residual_delay(const Eigen::VectorXd& theta, int order) {
  const double b0 = theta(order);
  const double b1 = theta(order + 1);
  if (!(std::abs(b0) > 1e-10 * theta.lpNorm<Eigen::Infinity>())) {
    throw UnobservableDelayError("delay unobservable: estimated gain b0 vanishes");
  }
  return b1 / b0;
}

double sin2_residual_delay(double b0, double b1, double b2, double window_length,
                           double norm_tolerance) {
  if (!(std::abs(b0) > 1e-10 * std::max({std::abs(b1), std::abs(b2), 1e-300}))) {
    throw UnobservableDelayError("delay unobservable: estimated gain b0 vanishes");
  }
  const double cos_part = 1.0 - 2.0 * b1 / b0;
  const double sin_part = 2.0 * b2 / b0;
  const double norm = std::hypot(cos_part, sin_part);
  if (std::abs(norm - 1.0) > norm_tolerance) {
    std::ostringstream os;
    os << "ill-conditioned delay: shift coefficients have norm " << norm << " instead of 1";
    throw IllConditionedDelayError(os.str());
  }
  return std::atan2(sin_part, cos_part) / kTwoPi * window_length;
}

EstimateReport estimate_delay_iterative(const TimeSeries& y, const TimeSeries& u,
                                        const WindowSet& windows, const DelayConfig& config) {
  const int n = config.order;
  const double tol = default_tolerance(config.tolerance, windows);
  std::vector<ModulatingKernel> kernels = config.kernels;
  if (config.variant == DelayVariant::taylor && kernels.empty()) {
    kernels.push_back(ModulatingKernel::sin_pow(std::max(n, config.taylor_order + 1)));
  }
  const double length = snapped_length(y, windows);

  WeightCache cache;
  EstimateReport report;
  double h = config.initial_delay;
  report.status = EstimateStatus::max_iterations;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    RegressionSystem sys;
    try {
      const TimeSeries us = shift(u, h);
      sys = config.variant == DelayVariant::taylor
                ? taylor_system(y, us, kernels, windows, n, config.taylor_order, cache)
                : sin2_system(y, us, windows, n, cache);
    } catch (const OutOfRangeError& e) {
      report.status = EstimateStatus::diverged;
      report.message = e.what();
      break;
    }
    const auto sol = solve_least_squares(sys);
    const double b0 = sol.theta(n);
    const double delta =
        config.variant == DelayVariant::taylor
            ? taylor_residual_delay(sol.theta, n)
            : sin2_residual_delay(b0, sol.theta(n + 1), sol.theta(n + 2), length,
                                  iter == 1 ? std::numeric_limits<double>::infinity()
                                            : config.norm_tolerance);
    h += delta;

    report.a.assign(sol.theta.data(), sol.theta.data() + n);
    report.b = b0;
    report.h = {h};
    report.residual = sol.residual_norm;
    report.trace.push_back({iter, {h}, b0, b0 * delta, sol.residual_norm});
    if (!std::isfinite(h)) {
      report.status = EstimateStatus::diverged;
      report.message = "delay estimate is not finite";
      break;
    }
    if (std::abs(delta) < tol) {
      report.status = EstimateStatus::converged;
      break;
    }
  }
  return report;
}

EstimateReport estimate_two_delay(const TimeSeries& y, const TimeSeries& u,
                                  const WindowSet& windows, const TwoDelayConfig& config) {
  if (windows.windows.empty()) throw ValidationError("window set is empty");
  if (!windows.uniform_length()) {
    throw ValidationError("the two-delay shift expansion needs windows of one common length");
  }
  const double tol = default_tolerance(config.tolerance, windows);
  const auto f = ModulatingKernel::one_minus_cos();
  const auto s = ModulatingKernel::sine(1);

  WeightCache cache;
  EstimateReport report;
  double h1 = config.initial_state_delay;
  double h2 = config.initial_input_delay;
  report.status = EstimateStatus::max_iterations;
  const auto rows = static_cast<Eigen::Index>(windows.windows.size());

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    RegressionSystem sys;
    sys.C = Eigen::MatrixXd::Zero(rows, 4);
    sys.D = Eigen::VectorXd::Zero(rows);
    sys.unknowns = {"a", "a*s1", "b", "b*s2"};
    double L = 0.0;
    try {
      const TimeSeries xs = shift(y, h1);
      const TimeSeries us = shift(u, h2);
      Eigen::Index row = 0;
      for (const auto& w : windows.windows) {
        const GridWindow gy = snap_window(y, w);
        const auto [gx, gu] = snap_pair(xs, us, w);
        L = gy.length();
        const std::size_t m = gy.samples();
        sys.C(row, 0) = apply_weights(xs, gx, cache.get(f, 0, m, y.dt()));
        sys.C(row, 1) = apply_weights(xs, gx, cache.get(s, 0, m, y.dt()));
        sys.C(row, 2) = -apply_weights(us, gu, cache.get(f, 0, m, y.dt()));
        sys.C(row, 3) = -apply_weights(us, gu, cache.get(s, 0, m, y.dt()));
        sys.D(row) = -apply_weights(y, gy, cache.get(f, 2, m, y.dt())) / (L * L);
        ++row;
      }
    } catch (const OutOfRangeError& e) {
      report.status = EstimateStatus::diverged;
      report.message = e.what();
      break;
    }
    const auto sol = solve_least_squares(sys);
    const double a = sol.theta(0);
    const double b = sol.theta(2);
    const double scale = sol.theta.lpNorm<Eigen::Infinity>();
    if (!(std::abs(a) > 1e-10 * scale)) {
      throw UnobservableDelayError("state delay unobservable: estimated coefficient a vanishes");
    }
    if (!(std::abs(b) > 1e-10 * scale)) {
      throw UnobservableDelayError("input delay unobservable: estimated gain b vanishes");
    }
    const double s1 = sol.theta(1) / a;
    const double s2 = sol.theta(3) / b;
    if (std::abs(s1) > 1.0 || std::abs(s2) > 1.0) {
      std::ostringstream os;
      os << "delay out of range: sine arguments (" << s1 << ", " << s2 << ") exceed 1";
      throw IllConditionedDelayError(os.str());
    }
    const double d1 = std::asin(s1) / kTwoPi * L;
    const double d2 = std::asin(s2) / kTwoPi * L;
    h1 += d1;
    h2 += d2;

    report.a = {a};
    report.b = b;
    report.h = {h1, h2};
    report.residual = sol.residual_norm;
    report.trace.push_back({iter, {h1, h2}, b, b * d2, sol.residual_norm});
    if (std::max(std::abs(d1), std::abs(d2)) < tol) {
      report.status = EstimateStatus::converged;
      break;
    }
  }
  return report;
}

std::vector<double> observe_state(const TimeSeries& y, const TimeSeries& u, const LinearModel& model,
                                  const Window& window, double lambda, Anchor at) {
  const int n = static_cast<int>(model.a.size());
  if (n < 1) throw ValidationError("observe_state: model has no coefficients");
  const TimeSeries us = shift(u, model.delay);
  const auto [gy, gu] = snap_pair(y, us, window);
  const double L = gy.length();
  const double end_theta = at == Anchor::right ? 1.0 : 0.0;
  const double sign = at == Anchor::right ? 1.0 : -1.0;

  std::vector<double> coeff(model.a);
  coeff.push_back(-1.0);

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const auto g = ModulatingKernel::exp_poly(j, lambda, at);
    double known = model.b * apply_weights(us, gu, kernel_weights(g, 0, gu.samples(), y.dt()));
    for (int i = 0; i <= n; ++i) {
      const double integral = apply_weights(y, gy, kernel_weights(g, i, gy.samples(), y.dt()));
      known += coeff[static_cast<std::size_t>(i)] * ((i % 2) ? -1.0 : 1.0) * std::pow(L, -i) * integral;
    }
    rhs(j) = -known;
    for (int l = 0; l < n; ++l) {
      double acc = 0.0;
      for (int i = l + 1; i <= n; ++i) {
        const int r = i - 1 - l;
        acc += coeff[static_cast<std::size_t>(i)] * ((r % 2) ? -1.0 : 1.0) * std::pow(L, -r) *
               g.derivative(r, end_theta, L);
      }
      G(j, l) = sign * acc;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  if (!lu.isInvertible()) {
    throw KernelContractError("observe_state: boundary system is singular");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace mfid
