#include "mfid/refine.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mfid/errors.hpp"
#include "mfid/signals.hpp"

namespace mfid {

namespace {

// Parameter layout: a_0 .. a_{n-1}, b, h, x(0) .. x^(n-1)(0).
struct Packing {
  int n;

  Eigen::Index size() const { return 2 * n + 2; }

  Eigen::VectorXd pack(const LinearModel& m, const std::vector<double>& x0) const {
    Eigen::VectorXd p(size());
    for (int i = 0; i < n; ++i) p(i) = m.a[static_cast<std::size_t>(i)];
    p(n) = m.b;
    p(n + 1) = m.delay;
    for (int i = 0; i < n; ++i) p(n + 2 + i) = x0[static_cast<std::size_t>(i)];
    return p;
  }

  LinearModel model(const Eigen::VectorXd& p) const {
    LinearModel m;
    m.a.assign(p.data(), p.data() + n);
    m.b = p(n);
    m.delay = p(n + 1);
    return m;
  }

  std::vector<double> state(const Eigen::VectorXd& p) const {
    return std::vector<double>(p.data() + n + 2, p.data() + 2 * n + 2);
  }
};

SystemSpec spec_for(const LinearModel& m, const std::vector<double>& x0) {
  SystemSpec spec;
  spec.order = static_cast<int>(m.a.size());
  for (double a : m.a) spec.coefficients.push_back(Profile::constant(a));
  spec.gain = m.b;
  spec.input_delay = Profile::constant(m.delay);
  spec.initial_state = x0;
  return spec;
}

std::size_t fitted_samples(const TimeSeries& y) {
  return y.valid_end();
}

// Residual y - x_sim over samples [valid_begin, valid_end).
Eigen::VectorXd residuals(const TimeSeries& y, const TimeSeries& u, const LinearModel& m,
                          const std::vector<double>& x0) {
  if (m.delay < 0.0) throw OutOfRangeError("negative delay");
  const double t_end = y.time(fitted_samples(y) - 1);
  const auto traj = simulate(spec_for(m, x0), u, t_end, y.dt());
  const TimeSeries& x = traj.front();
  Eigen::VectorXd r(static_cast<Eigen::Index>(y.valid_count()));
  for (std::size_t i = y.valid_begin(); i < y.valid_end(); ++i) {
    r(static_cast<Eigen::Index>(i - y.valid_begin())) = y[i] - x[i];
  }
  return r;
}

double safe_cost(const TimeSeries& y, const TimeSeries& u, const Packing& pk,
                 const Eigen::VectorXd& p, Eigen::VectorXd* r_out = nullptr) {
  try {
    Eigen::VectorXd r = residuals(y, u, pk.model(p), pk.state(p));
    const double c = r.squaredNorm();
    if (r_out) *r_out = std::move(r);
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  } catch (const OutOfRangeError&) {
    return std::numeric_limits<double>::infinity();
  } catch (const DivergenceError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

double simulation_cost(const TimeSeries& y, const TimeSeries& u, const LinearModel& model,
                       const std::vector<double>& initial_state) {
  return residuals(y, u, model, initial_state).squaredNorm();
}

EstimateReport refine_nonlinear(const TimeSeries& y, const TimeSeries& u, const EstimateReport& init,
                                const RefineConfig& config) {
  if (std::abs(y.t0()) > kGridTolerance * y.dt() || y.valid_begin() != 0) {
    throw ValidationError("refine_nonlinear: output series must start at t = 0");
  }
  if (init.h.size() != 1) {
    throw CapabilityError("refine_nonlinear: only the single input-delay model is supported");
  }
  const int n = static_cast<int>(init.a.size());
  const Packing pk{n};
  const LinearModel m0 = model_of(init);

  std::vector<double> x0 = init.state;
  if (x0.size() != static_cast<std::size_t>(n) || std::abs(init.state_time - y.t0()) > 1e-12) {
    x0 = observe_state(y, u, m0, Window{y.t0(), y.t0() + config.observer_window},
                       config.observer_lambda, Anchor::left);
  }

  Eigen::VectorXd p = pk.pack(m0, x0);
  Eigen::VectorXd r;
  double cost = safe_cost(y, u, pk, p, &r);
  if (!std::isfinite(cost)) {
    throw DivergenceError("refine_nonlinear: initial parameters do not produce a finite simulation");
  }

  EstimateReport out = init;
  out.state = x0;
  out.state_time = y.t0();
  out.cost = cost;
  out.status = EstimateStatus::no_improvement;
  if (cost == 0.0) {
    out.status = EstimateStatus::converged;
    return out;
  }

  double damping = config.initial_damping;
  bool improved = false;
  bool converged = false;
  const Eigen::Index np = pk.size();
  for (int iter = 1; iter <= config.max_iter && !converged; ++iter) {
    // Jacobian of the simulated trajectory, i.e. -d r / d p.
    Eigen::MatrixXd J(r.size(), np);
    for (Eigen::Index k = 0; k < np; ++k) {
      Eigen::VectorXd q = p;
      const double step = config.fd_step * std::max(std::abs(p(k)), 1.0);
      q(k) += step;
      Eigen::VectorXd rq;
      if (!std::isfinite(safe_cost(y, u, pk, q, &rq))) {
        q(k) = p(k) - step;
        if (!std::isfinite(safe_cost(y, u, pk, q, &rq))) {
          throw DivergenceError("refine_nonlinear: sensitivity simulation failed");
        }
        J.col(k) = (rq - r) / step;
      } else {
        J.col(k) = (r - rq) / step;
      }
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;

    bool accepted = false;
    for (int retry = 0; retry <= config.max_damping_retries; ++retry) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += damping * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd delta = A.ldlt().solve(g);
      const Eigen::VectorXd candidate = p + delta;
      Eigen::VectorXd rc;
      const double c = safe_cost(y, u, pk, candidate, &rc);
      if (c < cost) {
        const double drop = (cost - c) / cost;
        p = candidate;
        r = std::move(rc);
        cost = c;
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
        improved = true;
        if (drop < config.relative_tolerance) converged = true;
        break;
      }
      damping *= 10.0;
    }
    if (!accepted) {
      converged = improved;
      break;
    }
  }

  if (!improved) return out;

  const LinearModel m = pk.model(p);
  out.a = m.a;
  out.b = m.b;
  out.h = {m.delay};
  out.state = pk.state(p);
  out.cost = cost;
  out.status = converged ? EstimateStatus::converged : EstimateStatus::max_iterations;
  return out;
}

}  // namespace mfid
