#include "mfid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "mfid/errors.hpp"

namespace mfid {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_words(std::string_view s) {
  std::istringstream is{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

// Accepts plain numbers and simple fractions such as 1/3.
double parse_number(const std::string& word) {
  const auto slash = word.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const std::string num = word.substr(0, slash), den = word.substr(slash + 1);
      const double n = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(word);
      const double d = std::stod(den, &used);
      if (used != den.size() || d == 0.0) throw std::invalid_argument(word);
      return n / d;
    }
    const double v = std::stod(word, &used);
    if (used != word.size()) throw std::invalid_argument(word);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + word + "'");
  }
}

std::vector<double> parse_numbers(const std::vector<std::string>& words, std::size_t from = 0) {
  std::vector<double> out;
  for (std::size_t i = from; i < words.size(); ++i) out.push_back(parse_number(words[i]));
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ValidationError("not a boolean: '" + v + "'");
}

int parse_int(const std::string& v) {
  const double d = parse_number(v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ValidationError("not an integer: '" + v + "'");
  return static_cast<int>(d);
}

const std::map<std::string, std::size_t>& expression_arity() {
  static const std::map<std::string, std::size_t> arity{
      {"zero", 0}, {"constant", 1}, {"sine", 2}, {"cosine", 2}, {"modulated", 4}, {"twotone", 4}};
  return arity;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  const auto words = split_words(text);
  if (words.empty()) throw ValidationError("empty expression");
  Expression e;
  e.kind = words[0];
  const auto it = expression_arity().find(e.kind);
  if (it == expression_arity().end()) throw ValidationError("unknown expression '" + e.kind + "'");
  e.params = parse_numbers(words, 1);
  const bool phase_ok = (e.kind == "sine" || e.kind == "cosine") && e.params.size() == 3;
  if (e.params.size() != it->second && !phase_ok) {
    std::ostringstream os;
    os << "expression '" << e.kind << "' takes " << it->second << " parameters, got "
       << e.params.size();
    throw ValidationError(os.str());
  }
  if (e.kind == "sine" || e.kind == "cosine") e.params.resize(3, 0.0);
  return e;
}

ScalarFunction Expression::function() const {
  return derivative(0);
}

ScalarFunction Expression::derivative(int k) const {
  const auto p = params;
  if (kind == "zero") return [](double) { return 0.0; };
  if (kind == "constant") {
    const double c = k == 0 ? p[0] : 0.0;
    return [c](double) { return c; };
  }
  // d^k/dt^k of A sin(w t + phi) is A w^k sin(w t + phi + k pi/2).
  auto harmonic = [k](double A, double w, double phi) {
    const double amp = A * std::pow(w, k);
    const double shift = phi + k * std::numbers::pi / 2.0;
    return [amp, w, shift](double t) { return amp * std::sin(w * t + shift); };
  };
  if (kind == "sine") return harmonic(p[0], p[1], p[2]);
  if (kind == "cosine") return harmonic(p[0], p[1], p[2] + std::numbers::pi / 2.0);
  if (kind == "twotone") {
    auto s = harmonic(p[0], p[1], 0.0);
    auto c = harmonic(p[2], p[3], std::numbers::pi / 2.0);
    return [s, c](double t) { return s(t) + c(t); };
  }
  if (kind == "modulated") {
    if (k != 0) throw CapabilityError("modulated expression has no closed-form derivative here");
    const double A = p[0], w = p[1], a = p[2], b = p[3];
    return [=](double t) { return A * std::cos(w * t + a * std::sin(t) - b * std::cos(0.5 * t)); };
  }
  throw ValidationError("unknown expression '" + kind + "'");
}

std::string Expression::text() const {
  std::ostringstream os;
  os << kind;
  os.precision(17);
  for (double v : params) os << ' ' << v;
  return os.str();
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::batch: return "batch";
    case EstimatorKind::two_delay: return "two-delay";
    case EstimatorKind::online: return "online";
  }
  return "?";
}

void Scenario::validate() const {
  system.validate();
  if (input.has_value() == output.has_value()) {
    throw ValidationError("scenario needs exactly one of 'input' or 'output'");
  }
  if (!(rate > 0.0) || !(horizon > 0.0) || lead < 0.0) {
    throw ValidationError("rate and horizon must be positive, lead non-negative");
  }
  if (rate * (horizon + lead) > 5e7) throw ValidationError("rate * horizon exceeds the sample budget");
  if (noise.sigma < 0.0) throw ValidationError("noise must be >= 0");
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw ValidationError("sigmas must be >= 0");
  }
  if (trials < 1) throw ValidationError("trials must be >= 1");
  double earliest = 0.0;  // earliest input time the simulation reads
  for (int k = 0; k <= 2000; ++k) {
    const double t = horizon * k / 2000.0;
    earliest = std::min(earliest, t - system.input_delay(t));
  }
  if (earliest < -lead - 1e-9) {
    throw ValidationError("lead must cover the largest input delay");
  }
  switch (estimator) {
    case EstimatorKind::batch:
    case EstimatorKind::two_delay:
      if (windows.windows.empty()) throw ValidationError("batch estimators need 'windows'");
      for (const auto& w : windows.windows) {
        if (w.t1 < 0.0 || w.t2 > horizon) {
          throw ValidationError("window lies outside the observed horizon [0, horizon]");
        }
      }
      break;
    case EstimatorKind::online:
      online.validate();
      if (online.order != system.order) throw ValidationError("online order differs from system order");
      break;
  }
  if (estimator == EstimatorKind::two_delay && system.order != 2) {
    throw ValidationError("two-delay estimator needs order 2");
  }
  if (estimator == EstimatorKind::batch && batch.order != system.order) {
    throw ValidationError("batch order differs from system order");
  }
}

Scenario parse_scenario(std::string_view text, const std::string& origin) {
  Scenario sc;
  std::vector<double> coefficients;
  std::map<int, std::pair<double, double>> coefficient_ramps;
  double delay = 0.0;
  std::optional<std::pair<double, double>> delay_ramp;
  std::vector<double> initial_state;
  bool explicit_online_order = false;

  std::istringstream is{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto words = split_words(value);
    if (words.empty()) fail("missing value for '" + key + "'");
    try {
      auto one = [&]() {
        if (words.size() != 1) throw ValidationError("'" + key + "' takes one value");
        return parse_number(words[0]);
      };
      if (key == "name") {
        sc.name = value;
      } else if (key == "order") {
        sc.system.order = parse_int(words[0]);
        sc.batch.order = sc.system.order;
        if (!explicit_online_order) sc.online.order = sc.system.order;
      } else if (key == "a") {
        coefficients = parse_numbers(words);
      } else if (key.size() > 6 && key[0] == 'a' && key.ends_with(".ramp")) {
        const int idx = parse_int(key.substr(1, key.size() - 6));
        const auto v = parse_numbers(words);
        if (v.size() != 2) throw ValidationError("ramp takes 'start slope'");
        coefficient_ramps[idx] = {v[0], v[1]};
      } else if (key == "b") {
        sc.system.gain = one();
      } else if (key == "delay") {
        delay = one();
      } else if (key == "delay.ramp") {
        const auto v = parse_numbers(words);
        if (v.size() != 2) throw ValidationError("ramp takes 'start slope'");
        delay_ramp = std::make_pair(v[0], v[1]);
      } else if (key == "state_delay") {
        sc.system.state_delay = one();
      } else if (key == "x0") {
        initial_state = parse_numbers(words);
      } else if (key == "input") {
        sc.input = Expression::parse(value);
      } else if (key == "output") {
        sc.output = Expression::parse(value);
      } else if (key == "rate") {
        sc.rate = one();
      } else if (key == "horizon") {
        sc.horizon = one();
      } else if (key == "lead") {
        sc.lead = one();
      } else if (key == "noise") {
        sc.noise.sigma = one();
      } else if (key == "seed") {
        sc.noise.seed = static_cast<std::uint64_t>(parse_int(words[0]));
      } else if (key == "sigmas") {
        sc.sigmas = parse_numbers(words);
      } else if (key == "trials") {
        sc.trials = parse_int(words[0]);
      } else if (key == "estimator") {
        if (value == "batch") sc.estimator = EstimatorKind::batch;
        else if (value == "two-delay") sc.estimator = EstimatorKind::two_delay;
        else if (value == "online") sc.estimator = EstimatorKind::online;
        else throw ValidationError("unknown estimator '" + value + "'");
      } else if (key == "windows") {
        if (words[0] == "regular") {
          const auto v = parse_numbers(words, 1);
          if (v.size() != 4) throw ValidationError("windows = regular first_t1 length step count");
          sc.windows = WindowSet::regular(v[0], v[1], v[2], static_cast<int>(v[3]));
        } else {
          sc.windows.windows.clear();
          for (const auto& w : words) {
            const auto colon = w.find(':');
            if (colon == std::string::npos) throw ValidationError("window '" + w + "' is not t1:t2");
            sc.windows.windows.push_back(
                {parse_number(w.substr(0, colon)), parse_number(w.substr(colon + 1))});
          }
        }
      } else if (key == "batch.variant") {
        if (value == "sin2") sc.batch.variant = DelayVariant::sin2;
        else if (value == "taylor") sc.batch.variant = DelayVariant::taylor;
        else throw ValidationError("unknown variant '" + value + "'");
      } else if (key == "batch.kernels") {
        sc.batch.kernels.clear();
        for (const auto& w : words) sc.batch.kernels.push_back(ModulatingKernel::parse(w));
      } else if (key == "batch.taylor_order") {
        sc.batch.taylor_order = parse_int(words[0]);
      } else if (key == "batch.max_iter") {
        sc.batch.max_iter = parse_int(words[0]);
      } else if (key == "batch.tolerance") {
        sc.batch.tolerance = one();
      } else if (key == "batch.initial_delay") {
        sc.batch.initial_delay = one();
      } else if (key == "batch.norm_tolerance") {
        sc.batch.norm_tolerance = one();
      } else if (key == "two_delay.initial") {
        const auto v = parse_numbers(words);
        if (v.size() != 2) throw ValidationError("two_delay.initial takes 'h1 h2'");
        sc.two_delay.initial_state_delay = v[0];
        sc.two_delay.initial_input_delay = v[1];
      } else if (key == "two_delay.max_iter") {
        sc.two_delay.max_iter = parse_int(words[0]);
      } else if (key == "two_delay.tolerance") {
        sc.two_delay.tolerance = one();
      } else if (key == "observer.window") {
        const auto v = parse_numbers(words);
        if (v.size() != 2) throw ValidationError("observer.window takes 't1 t2'");
        sc.observer_window = Window{v[0], v[1]};
      } else if (key == "observer.lambda") {
        sc.observer_lambda = one();
      } else if (key == "refine") {
        sc.refine = parse_bool(value);
      } else if (key == "refine.max_iter") {
        sc.refine_config.max_iter = parse_int(words[0]);
      } else if (key == "online.order") {
        sc.online.order = parse_int(words[0]);
        explicit_online_order = true;
      } else if (key == "online.kernels") {
        sc.online.kernels = parse_int(words[0]);
      } else if (key == "online.lambda") {
        sc.online.lambda = one();
      } else if (key == "online.gain") {
        const auto v = parse_numbers(words);
        if (v.size() == 1) {
          sc.online.gain = v[0];
          sc.online.gains.clear();
        } else {
          sc.online.gains = v;
        }
      } else if (key == "online.track_delay") {
        sc.online.track_delay = parse_bool(value);
      } else if (key == "online.delay_gain") {
        sc.online.tracker.gain = one();
      } else if (key == "online.activation_time") {
        sc.online.tracker.activation_time = one();
      } else if (key == "online.b0_floor") {
        sc.online.tracker.b0_floor = one();
      } else if (key == "online.initial_delay") {
        sc.online.initial_delay = one();
      } else if (key == "online.drift_correction") {
        sc.online.drift_correction = parse_bool(value);
      } else {
        throw ValidationError("unknown key '" + key + "'");
      }
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.rfind(origin + ":", 0) == 0) throw;
      fail(what);
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  auto fail_global = [&](const std::string& what) { throw ValidationError(origin + ": " + what); };
  const int n = sc.system.order;
  if (n < 1) fail_global("order must be >= 1");
  if (static_cast<int>(coefficients.size()) != n) {
    fail_global("'a' must list " + std::to_string(n) + " coefficients a_0 .. a_{n-1}");
  }
  sc.system.coefficients.clear();
  for (int i = 0; i < n; ++i) {
    const double a = coefficients[static_cast<std::size_t>(i)];
    const auto ramp = coefficient_ramps.find(i);
    sc.system.coefficients.push_back(ramp == coefficient_ramps.end()
                                         ? Profile::constant(a)
                                         : Profile::ramp_after(a, ramp->second.first, ramp->second.second));
  }
  for (const auto& [idx, r] : coefficient_ramps) {
    if (idx < 0 || idx >= n) fail_global("ramp on a nonexistent coefficient a" + std::to_string(idx));
  }
  sc.system.input_delay = delay_ramp ? Profile::ramp_after(delay, delay_ramp->first, delay_ramp->second)
                                     : Profile::constant(delay);
  if (sc.output) {
    if (!initial_state.empty()) fail_global("'x0' is derived from 'output' and must not be given");
    for (int k = 0; k < n; ++k) sc.system.initial_state.push_back(sc.output->derivative(k)(0.0));
    sc.system.history = sc.output->function();
  } else {
    sc.system.initial_state = initial_state;
  }
  if (sc.name.empty()) sc.name = "unnamed";
  try {
    sc.validate();
  } catch (const ValidationError& e) {
    fail_global(e.what());
  }
  return sc;
}

namespace {

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p{
      {"example1", R"(# Online identification with a drifting coefficient
name = example1
order = 2
a = -0.35 -1.2
a1.ramp = 30 -0.02
b = 2
delay = 0
x0 = 20 0.3
input = modulated 60 1.23 1.3 0.7
rate = 100
horizon = 60
lead = 10
noise = 5
seed = 1
estimator = online
online.kernels = 5
online.lambda = 1
online.gain = 1e-3
)"},
      {"example2", R"(# Batch delay identification with the sin^2 kernel
name = example2
order = 2
a = -0.35 -1.2
b = 2
delay = 4
x0 = 20 0.3
input = modulated 60 1.23 0.33 0.47
rate = 500
horizon = 105
lead = 20
noise = 1
seed = 1
estimator = batch
windows = regular 10 15 10 9
batch.variant = sin2
batch.max_iter = 50
batch.initial_delay = 0
observer.window = 0 15
observer.lambda = 1
)"},
      {"example3", R"(# Two delays: x'' + a x(t - h1) = b u(t - h2), u obtained by inversion
name = example3
order = 2
a = -2.7 0
b = 1.5
state_delay = 2
delay = 4
output = twotone 3 1/2 2 1/3
rate = 500
horizon = 80
lead = 20
noise = 0.05
seed = 1
estimator = two-delay
windows = regular 15 10 2 20
two_delay.initial = 1.8 3.8
two_delay.max_iter = 10
)"},
      {"example4", R"(# Online delay tracking, constant delay 0.5
name = example4
order = 2
a = -0.35 -1.2
b = 2
delay = 0.5
x0 = 20 0.3
input = modulated 60 1.23 1.3 0.7
rate = 100
horizon = 60
lead = 10
noise = 5
seed = 1
estimator = online
online.kernels = 5
online.lambda = 1
online.gain = 4e-3
online.track_delay = true
online.delay_gain = 0.4
online.activation_time = 14
online.initial_delay = 0
)"},
      {"example5", R"(# Online tracking of a slowly varying delay
name = example5
order = 2
a = -0.35 -1.2
b = 2
delay = 3.2
delay.ramp = 0 0.01
x0 = 20 0.3
input = modulated 60 1.23 1.3 0.7
rate = 100
horizon = 120
lead = 10
noise = 5
seed = 1
estimator = online
online.kernels = 5
online.lambda = 1
online.gain = 4e-4
online.track_delay = true
online.delay_gain = 0.4
online.activation_time = 40
online.initial_delay = 3.6
)"},
  };
  return p;
}

// Experiment presets reuse an example and add a sweep.
const std::map<std::string, std::pair<std::string, std::string>>& experiments() {
  static const std::map<std::string, std::pair<std::string, std::string>> e{
      {"table0", {"example2", "name = table0\nsigmas = 1 2 5 10\ntrials = 100\n"}},
      {"table1", {"example2", "name = table1\nsigmas = 5 10\ntrials = 100\nrefine = true\n"}},
      {"table2", {"example3", "name = table2\nsigmas = 0.025 0.05 0.1 0.2\ntrials = 100\n"}},
  };
  return e;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : presets()) names.push_back(k);
  for (const auto& [k, v] : experiments()) names.push_back(k);
  return names;
}

std::string preset_text(const std::string& name) {
  if (auto it = presets().find(name); it != presets().end()) return it->second;
  if (auto it = experiments().find(name); it != experiments().end()) {
    return presets().at(it->second.first) + "# experiment sweep\n" + it->second.second;
  }
  std::string known;
  for (const auto& n : preset_names()) known += " " + n;
  throw ValidationError("unknown preset '" + name + "' (known:" + known + ")");
}

Scenario load_scenario(const std::string& preset_or_path) {
  if (presets().count(preset_or_path) || experiments().count(preset_or_path)) {
    return parse_scenario(preset_text(preset_or_path), preset_or_path);
  }
  std::ifstream in(preset_or_path);
  if (!in) {
    throw IoError("cannot open scenario '" + preset_or_path + "' (not a file or a known preset)");
  }
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str(), preset_or_path);
}

}  // namespace mfid
