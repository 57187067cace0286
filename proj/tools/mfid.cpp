#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mfid/errors.hpp"
#include "mfid/online.hpp"
#include "mfid/pipeline.hpp"
#include "mfid/report_io.hpp"
#include "mfid/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Preset name or scenario file")->required();
  cmd->add_option("--seed", c.seed, "Noise seed (default: scenario seed)");
  cmd->add_option("--sigma", c.sigma, "Noise standard deviation (default: scenario noise)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

fs::path out_dir(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw mfid::IoError("cannot create directory '" + c.out + "': " + ec.message());
  return dir;
}

std::string out_file(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

mfid::Dataset dataset_for(const mfid::Scenario& sc, const Common& c) {
  return mfid::generate_data(sc, c.sigma.value_or(sc.noise.sigma), c.seed.value_or(sc.noise.seed));
}

void print_report(const char* label, const mfid::EstimateReport& r) {
  std::cout << label << ": status " << mfid::to_string(r.status) << ", ";
  if (r.h.size() == 2) {
    std::cout << "a " << r.a.at(0);
  } else {
    for (std::size_t i = r.a.size(); i-- > 0;) std::cout << "a" << i << ' ' << r.a[i] << ", ";
  }
  std::cout << (r.h.size() == 2 ? ", b " : "b ") << r.b;
  if (r.h.size() == 2) {
    std::cout << ", h1 " << r.h[0] << ", h2 " << r.h[1];
  } else if (!r.h.empty()) {
    std::cout << ", h " << r.h[0];
  }
  if (!r.state.empty()) {
    std::cout << ", state(" << r.state_time << ")";
    for (double x : r.state) std::cout << ' ' << x;
  }
  if (std::isfinite(r.cost)) std::cout << ", cost " << r.cost;
  std::cout << '\n';
}

int status_exit(const mfid::EstimateReport& r) {
  return r.status == mfid::EstimateStatus::diverged ? kExitNumerical : 0;
}

int cmd_simulate(const Common& c) {
  const auto sc = mfid::load_scenario(c.scenario);
  const auto data = dataset_for(sc, c);
  const auto dir = out_dir(c);
  mfid::write_series_csv(out_file(dir, "u.csv"), data.u);
  mfid::write_series_csv(out_file(dir, "x.csv"), data.x);
  mfid::write_series_csv(out_file(dir, "y.csv"), data.y);
  std::cout << "wrote u.csv, x.csv, y.csv to " << dir.string() << " (" << data.y.size()
            << " output samples)\n";
  if (std::isfinite(data.roundtrip_error)) {
    std::cout << "round-trip residual over [0, " << data.roundtrip_horizon
              << "]: " << std::scientific << std::setprecision(3) << data.roundtrip_error << '\n';
  }
  return 0;
}

struct IdentifyArgs {
  Common common;
  std::string y_csv;
  std::string u_csv;
  bool refine = false;
  bool two_delay = false;
};

int cmd_identify(const IdentifyArgs& a) {
  auto sc = mfid::load_scenario(a.common.scenario);
  if (a.two_delay) sc.estimator = mfid::EstimatorKind::two_delay;
  if (sc.estimator == mfid::EstimatorKind::online) {
    throw mfid::ValidationError("scenario '" + sc.name + "' is an online scenario; use 'mfid online'");
  }
  mfid::TimeSeries y, u;
  if (!a.y_csv.empty() || !a.u_csv.empty()) {
    if (a.y_csv.empty() || a.u_csv.empty()) throw mfid::ValidationError("--y and --u go together");
    y = mfid::read_series_csv(a.y_csv);
    u = mfid::read_series_csv(a.u_csv);
  } else {
    auto data = dataset_for(sc, a.common);
    y = std::move(data.y);
    u = std::move(data.u);
  }
  // Window coverage is checked before any solve.
  for (const auto& w : sc.windows.windows) {
    if (!y.covers(w.t1, w.t2)) {
      std::ostringstream os;
      os << "invalid index: window [" << w.t1 << ", " << w.t2 << "] is outside the data";
      throw mfid::OutOfRangeError(os.str());
    }
  }
  const auto dir = out_dir(a.common);
  mfid::EstimateReport linear;
  std::optional<mfid::EstimateReport> refined;
  if (sc.estimator == mfid::EstimatorKind::two_delay) {
    if (a.refine) throw mfid::CapabilityError("--refine supports the single-delay model only");
    linear = mfid::run_two_delay(sc, y, u);
  } else {
    auto outcome = mfid::run_batch(sc, y, u, a.refine);
    linear = std::move(outcome.linear);
    refined = std::move(outcome.refined);
  }
  mfid::write_text_file(out_file(dir, "report.json"),
                        mfid::outcome_json(linear, refined ? &*refined : nullptr));
  {
    std::ofstream os(out_file(dir, "trace.csv"));
    if (!os) throw mfid::IoError("cannot write trace.csv");
    mfid::write_trace_csv(os, linear);
  }
  print_report("linear", linear);
  if (refined) print_report("refined*", *refined);
  return status_exit(linear);
}

int cmd_online(const Common& c) {
  const auto sc = mfid::load_scenario(c.scenario);
  if (sc.estimator != mfid::EstimatorKind::online) {
    throw mfid::ValidationError("scenario '" + sc.name + "' is not an online scenario");
  }
  const auto data = dataset_for(sc, c);
  const auto dir = out_dir(c);
  const auto path = out_file(dir, "online.csv");
  std::ofstream os(path);
  if (!os) throw mfid::IoError("cannot write '" + path + "'");
  os << mfid::online_log_header(sc.online.order) << '\n';
  double t_fail = data.y.valid_start_time();
  mfid::OnlineSnapshot last;
  try {
    last = mfid::run_online(sc, data, [&](const mfid::OnlineSnapshot& s) {
      t_fail = s.t;
      mfid::write_online_row(os, s);
    });
  } catch (const mfid::Error& e) {
    std::ostringstream msg;
    msg << "t = " << t_fail << ": " << e.what();
    if (e.kind() == mfid::ErrorKind::validation) throw mfid::ValidationError(msg.str());
    if (e.kind() == mfid::ErrorKind::io) throw mfid::IoError(msg.str());
    throw mfid::DivergenceError(msg.str());
  }
  if (!os) throw mfid::IoError("failed writing '" + path + "'");
  std::cout << "wrote " << path << "\nfinal t " << last.t;
  for (std::size_t i = last.a.size(); i-- > 0;) std::cout << ", a" << i << ' ' << last.a[i];
  std::cout << ", b0 " << last.b0;
  if (sc.online.track_delay) std::cout << ", b1 " << last.b1 << ", h " << last.h;
  std::cout << '\n';
  return 0;
}

struct MonteCarloArgs {
  Common common;
  int trials = 0;
  bool refine = false;
  bool skip_failed = false;
  unsigned threads = 0;
};

std::string sigma_tag(double s) {
  std::ostringstream os;
  os << s;
  return os.str();
}

int cmd_montecarlo(const MonteCarloArgs& a) {
  const auto sc = mfid::load_scenario(a.common.scenario);
  std::vector<double> sigmas = sc.sigmas;
  if (a.common.sigma) sigmas = {*a.common.sigma};
  if (sigmas.empty()) sigmas = {sc.noise.sigma};
  mfid::MonteCarloOptions opt;
  opt.trials = a.trials > 0 ? a.trials : sc.trials;
  opt.first_seed = a.common.seed.value_or(1);
  opt.skip_failed = a.skip_failed;
  opt.refine = a.refine || sc.refine;
  opt.threads = a.threads;
  const auto dir = out_dir(a.common);
  std::string text;
  for (double sigma : sigmas) {
    const auto summary = mfid::run_monte_carlo(sc, sigma, opt);
    const std::string name =
        sigmas.size() == 1 ? "summary.csv" : "summary_sigma" + sigma_tag(sigma) + ".csv";
    std::ofstream os(out_file(dir, name));
    if (!os) throw mfid::IoError("cannot write " + name);
    mfid::write_summary_csv(os, summary);
    const auto block = mfid::format_summary(summary);
    std::cout << block << '\n';
    text += block + '\n';
  }
  mfid::write_text_file(out_file(dir, "summary.txt"), text);
  return 0;
}

int cmd_presets(const std::string& write_dir) {
  for (const auto& name : mfid::preset_names()) {
    std::cout << name << '\n';
    if (!write_dir.empty()) {
      fs::create_directories(write_dir);
      mfid::write_text_file((fs::path(write_dir) / (name + ".scn")).string(), mfid::preset_text(name));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identification of linear systems with delays by modulating functions"};
  app.require_subcommand(1);

  Common sim;
  auto* simulate = app.add_subcommand("simulate", "Write u.csv, x.csv (truth) and y.csv (noisy)");
  add_common(simulate, sim);

  IdentifyArgs ident;
  auto* identify = app.add_subcommand("identify", "Batch identification; writes report.json and trace.csv");
  add_common(identify, ident.common);
  identify->add_option("--y", ident.y_csv, "Output CSV (time,value) instead of generated data");
  identify->add_option("--u", ident.u_csv, "Input CSV (time,value)");
  identify->add_flag("--refine", ident.refine, "Polish with simulation-error least squares");
  identify->add_flag("--two-delay", ident.two_delay, "Use the state-and-input delay model");

  Common onl;
  auto* online = app.add_subcommand("online", "Online estimation; writes the online.csv log");
  add_common(online, onl);

  MonteCarloArgs mc;
  auto* montecarlo = app.add_subcommand("montecarlo", "Seeded trials; writes summary CSV and text");
  add_common(montecarlo, mc.common);
  montecarlo->add_option("--trials", mc.trials, "Number of trials (default: scenario)");
  montecarlo->add_flag("--refine", mc.refine, "Add refined (starred) estimates");
  montecarlo->add_flag("--skip-failed", mc.skip_failed, "Exclude failed trials instead of aborting");
  montecarlo->add_option("--threads", mc.threads, "Worker threads (0: all cores)");

  std::string presets_dir;
  auto* presets = app.add_subcommand("presets", "List bundled scenarios");
  presets->add_option("--write", presets_dir, "Also write them as .scn files into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*identify) return cmd_identify(ident);
    if (*online) return cmd_online(onl);
    if (*montecarlo) return cmd_montecarlo(mc);
    if (*presets) return cmd_presets(presets_dir);
  } catch (const mfid::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case mfid::ErrorKind::validation: return kExitValidation;
      case mfid::ErrorKind::numerical: return kExitNumerical;
      case mfid::ErrorKind::io: return kExitIo;
    }
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
