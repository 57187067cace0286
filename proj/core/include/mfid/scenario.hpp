#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfid/batch.hpp"
#include "mfid/online.hpp"
#include "mfid/refine.hpp"
#include "mfid/signals.hpp"

namespace mfid {

/// Named closed-form signal:
///   zero
///   constant c
///   sine A w [phase]        A sin(w t + phase)
///   cosine A w [phase]      A cos(w t + phase)
///   modulated A w p q       A cos(w t + p sin(t) - q cos(t/2))
///   twotone A1 w1 A2 w2     A1 sin(w1 t) + A2 cos(w2 t)
struct Expression {
  std::string kind = "zero";
  std::vector<double> params;

  static Expression parse(std::string_view text);
  ScalarFunction function() const;
  /// Derivative of order k (k <= 3) in closed form.
  ScalarFunction derivative(int k) const;
  std::string text() const;
};

enum class EstimatorKind { batch, two_delay, online };

std::string to_string(EstimatorKind kind);

struct Scenario {
  std::string name;
  SystemSpec system;
  /// Exactly one of input (simulate the output) or output (invert for the input).
  std::optional<Expression> input;
  std::optional<Expression> output;
  double rate = 500.0;    // Hz
  double horizon = 60.0;  // output observed on [0, horizon]
  double lead = 20.0;     // input available from -lead
  NoiseSpec noise;

  EstimatorKind estimator = EstimatorKind::batch;
  DelayConfig batch;
  WindowSet windows;
  TwoDelayConfig two_delay;
  OnlineConfig online;
  bool refine = false;
  RefineConfig refine_config;
  std::optional<Window> observer_window;  // batch: observe the state on this window
  double observer_lambda = 1.0;

  std::vector<double> sigmas;  // Monte Carlo sweep; empty means {noise.sigma}
  int trials = 100;

  double dt() const noexcept { return 1.0 / rate; }
  void validate() const;
};

/// key = value lines, '#' comments. Errors carry "origin:line:" prefixes.
Scenario parse_scenario(std::string_view text, const std::string& origin = "<scenario>");

/// Preset name or path to a scenario file.
Scenario load_scenario(const std::string& preset_or_path);

std::vector<std::string> preset_names();
/// Text of a bundled preset; throws ValidationError for unknown names.
std::string preset_text(const std::string& name);

}  // namespace mfid
