#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mfid/batch.hpp"
#include "mfid/errors.hpp"
#include "mfid/online.hpp"
#include "mfid/scenario.hpp"

namespace mfid {

struct Dataset {
  TimeSeries u;     // input, from -lead
  TimeSeries x;     // noiseless output on [0, horizon]
  TimeSeries xdot;  // its derivative
  TimeSeries y;     // x plus noise
  /// Output-defined scenarios: max |simulate(invert(x)) - x| over the check horizon.
  double roundtrip_error = std::numeric_limits<double>::quiet_NaN();
  double roundtrip_horizon = 0.0;
};

/// Noise-free part depends only on the scenario; noise on (sigma, seed).
Dataset generate_data(const Scenario& scenario, double sigma, std::uint64_t seed);

/// Adds noise to an existing noise-free dataset (cheap for Monte Carlo).
Dataset with_noise(const Dataset& clean, double sigma, std::uint64_t seed);

/// Batch pipeline: delay iteration, optional state observation, optional refinement.
struct BatchOutcome {
  EstimateReport linear;
  std::optional<EstimateReport> refined;
};

BatchOutcome run_batch(const Scenario& scenario, const TimeSeries& y, const TimeSeries& u,
                       bool refine);
EstimateReport run_two_delay(const Scenario& scenario, const TimeSeries& y, const TimeSeries& u);
OnlineSnapshot run_online(const Scenario& scenario, const Dataset& data, const SnapshotSink& sink = {});

/// Named scalar results of one trial, in a stable order.
using NamedValues = std::vector<std::pair<std::string, double>>;

NamedValues trial_values(const Scenario& scenario, const Dataset& data, bool refine);

struct ParamStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct TrialFailure {
  std::uint64_t seed = 0;
  ErrorKind kind = ErrorKind::numerical;
  std::string message;
};

struct ExperimentSummary {
  std::string scenario;
  double sigma = 0.0;
  int trials = 0;
  std::vector<ParamStats> params;
  std::vector<TrialFailure> failures;
  double wall_seconds = 0.0;
};

struct MonteCarloOptions {
  int trials = 100;
  std::uint64_t first_seed = 1;  // trial k uses seed first_seed + k
  bool skip_failed = false;      // otherwise the first failure (by seed) is rethrown
  bool refine = false;
  unsigned threads = 0;          // 0: hardware concurrency
};

ExperimentSummary run_monte_carlo(const Scenario& scenario, double sigma, const MonteCarloOptions& options);

/// Mean and sample standard deviation in the given order.
ParamStats summarize(const std::string& name, const std::vector<double>& values);

}  // namespace mfid
