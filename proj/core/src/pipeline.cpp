#include "mfid/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "mfid/refine.hpp"
#include "mfid/signals.hpp"

namespace mfid {

namespace {

std::size_t samples_between(double t0, double t1, double dt) {
  return static_cast<std::size_t>(std::llround((t1 - t0) / dt)) + 1;
}

std::string state_name(int k) {
  if (k == 0) return "x0";
  if (k == 1) return "xdot0";
  return "x" + std::to_string(k) + "_0";
}

}  // namespace

Dataset generate_data(const Scenario& scenario, double sigma, std::uint64_t seed) {
  scenario.validate();
  const double dt = scenario.dt();
  const double tail = 1.0;  // input margin past the horizon
  const std::size_t n_out = samples_between(0.0, scenario.horizon, dt);
  Dataset d;
  if (scenario.input) {
    d.u = sample_expression(scenario.input->function(), -scenario.lead, dt,
                            samples_between(-scenario.lead, scenario.horizon + tail, dt));
    auto traj = simulate(scenario.system, d.u, scenario.horizon, dt);
    d.x = traj[0];
    d.xdot = traj.size() > 1 ? traj[1] : differentiate(traj[0]);
  } else {
    const auto f = scenario.output->function();
    const auto full = sample_expression(f, -scenario.lead, dt,
                                        samples_between(-scenario.lead, scenario.horizon + tail, dt));
    d.u = invert_for_input(scenario.system, full);
    d.x = sample_expression(f, 0.0, dt, n_out);
    d.xdot = sample_expression(scenario.output->derivative(1), 0.0, dt, n_out);
    // Short horizon: the delay equation may be unstable.
    d.roundtrip_horizon = std::min(20.0, scenario.horizon);
    const auto sim = simulate(scenario.system, d.u, d.roundtrip_horizon, dt);
    double err = 0.0;
    for (std::size_t i = 0; i < sim[0].size(); ++i) err = std::max(err, std::abs(sim[0][i] - d.x[i]));
    d.roundtrip_error = err;
  }
  d.y = add_noise(d.x, {sigma, seed});
  return d;
}

Dataset with_noise(const Dataset& clean, double sigma, std::uint64_t seed) {
  Dataset d = clean;
  d.y = add_noise(clean.x, {sigma, seed});
  return d;
}

BatchOutcome run_batch(const Scenario& scenario, const TimeSeries& y, const TimeSeries& u,
                       bool refine) {
  BatchOutcome out;
  out.linear = estimate_delay_iterative(y, u, scenario.windows, scenario.batch);
  if (out.linear.status == EstimateStatus::diverged) return out;
  if (scenario.observer_window) {
    out.linear.state = observe_state(y, u, model_of(out.linear), *scenario.observer_window,
                                     scenario.observer_lambda, Anchor::left);
    out.linear.state_time = scenario.observer_window->t1;
  }
  if (refine) {
    RefineConfig cfg = scenario.refine_config;
    cfg.observer_lambda = scenario.observer_lambda;
    out.refined = refine_nonlinear(y, u, out.linear, cfg);
  }
  return out;
}

EstimateReport run_two_delay(const Scenario& scenario, const TimeSeries& y, const TimeSeries& u) {
  return estimate_two_delay(y, u, scenario.windows, scenario.two_delay);
}

OnlineSnapshot run_online(const Scenario& scenario, const Dataset& data, const SnapshotSink& sink) {
  return run_online(data.y, data.u, scenario.online, sink);
}

NamedValues trial_values(const Scenario& scenario, const Dataset& data, bool refine) {
  NamedValues v;
  switch (scenario.estimator) {
    case EstimatorKind::batch: {
      const auto outcome = run_batch(scenario, data.y, data.u, refine);
      auto add = [&v](const EstimateReport& r, const std::string& suffix) {
        for (std::size_t i = r.a.size(); i-- > 0;) v.emplace_back("a" + std::to_string(i) + suffix, r.a[i]);
        v.emplace_back("b" + suffix, r.b);
        v.emplace_back("h" + suffix, r.h.at(0));
        for (std::size_t k = 0; k < r.state.size(); ++k) {
          v.emplace_back(state_name(static_cast<int>(k)) + suffix, r.state[k]);
        }
      };
      if (outcome.linear.status == EstimateStatus::diverged) {
        throw DivergenceError("delay iteration diverged: " + outcome.linear.message);
      }
      add(outcome.linear, "");
      if (outcome.refined) add(*outcome.refined, "*");
      break;
    }
    case EstimatorKind::two_delay: {
      const auto r = run_two_delay(scenario, data.y, data.u);
      if (r.status == EstimateStatus::diverged) {
        throw DivergenceError("two-delay iteration diverged: " + r.message);
      }
      v = {{"a", r.a.at(0)}, {"b", r.b}, {"h1", r.h.at(0)}, {"h2", r.h.at(1)}};
      break;
    }
    case EstimatorKind::online: {
      const auto s = run_online(scenario, data);
      for (std::size_t i = s.a.size(); i-- > 0;) v.emplace_back("a" + std::to_string(i), s.a[i]);
      v.emplace_back("b0", s.b0);
      if (scenario.online.track_delay) {
        v.emplace_back("b1", s.b1);
        v.emplace_back("h", s.h);
      }
      v.emplace_back("x", s.state.at(0));
      if (s.state.size() > 1) v.emplace_back("xdot", s.state[1]);
      break;
    }
  }
  return v;
}

ParamStats summarize(const std::string& name, const std::vector<double>& values) {
  ParamStats s;
  s.name = name;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : values) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) {
    s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (double x : values) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

ExperimentSummary run_monte_carlo(const Scenario& scenario, double sigma,
                                  const MonteCarloOptions& options) {
  if (options.trials < 2) throw ValidationError("Monte Carlo needs at least 2 trials");
  const auto start = std::chrono::steady_clock::now();
  const Dataset clean = generate_data(scenario, 0.0, 0);

  struct Slot {
    NamedValues values;
    std::exception_ptr error;
    TrialFailure failure;
  };
  const auto trials = static_cast<std::size_t>(options.trials);
  std::vector<Slot> slots(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < trials; k = next++) {
      const std::uint64_t seed = options.first_seed + k;
      Slot& slot = slots[k];
      try {
        slot.values = trial_values(scenario, with_noise(clean, sigma, seed), options.refine);
      } catch (const Error& e) {
        slot.error = std::current_exception();
        slot.failure = {seed, e.kind(), e.what()};
      } catch (const std::exception& e) {
        slot.error = std::current_exception();
        slot.failure = {seed, ErrorKind::numerical, e.what()};
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  ExperimentSummary summary;
  summary.scenario = scenario.name;
  summary.sigma = sigma;
  summary.trials = options.trials;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  for (const Slot& slot : slots) {
    if (slot.error) {
      if (!options.skip_failed) std::rethrow_exception(slot.error);
      summary.failures.push_back(slot.failure);
      continue;
    }
    if (names.empty()) {
      for (const auto& [name, value] : slot.values) names.push_back(name);
      columns.resize(names.size());
    }
    for (std::size_t i = 0; i < names.size() && i < slot.values.size(); ++i) {
      columns[i].push_back(slot.values[i].second);
    }
  }
  for (std::size_t i = 0; i < names.size(); ++i) summary.params.push_back(summarize(names[i], columns[i]));
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace mfid
