#include "mfid/report_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mfid/errors.hpp"

namespace mfid {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write '" + path + "'");
  return os;
}

nlohmann::json number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j;
  j["a"] = r.a;
  j["b"] = r.b;
  j["h"] = r.h;
  if (!r.state.empty()) {
    j["state"] = r.state;
    j["state_time"] = r.state_time;
  }
  j["residual"] = number(r.residual);
  j["cost"] = number(r.cost);
  j["status"] = to_string(r.status);
  if (!r.message.empty()) j["message"] = r.message;
  auto trace = nlohmann::json::array();
  for (const auto& it : r.trace) {
    trace.push_back({{"iter", it.iteration},
                     {"h_hat", it.h_hat},
                     {"b0", number(it.b0)},
                     {"b1", number(it.b1)},
                     {"residual", number(it.residual)}});
  }
  j["trace"] = std::move(trace);
  return j;
}

}  // namespace

void write_series_csv(std::ostream& os, const TimeSeries& ts) {
  os << "time,value\n" << std::setprecision(15);
  for (std::size_t i = ts.valid_begin(); i < ts.valid_end(); ++i) {
    os << ts.time(i) << ',' << ts[i] << '\n';
  }
}

void write_series_csv(const std::string& path, const TimeSeries& ts) {
  auto os = open_out(path);
  write_series_csv(os, ts);
  if (!os) throw IoError("failed writing '" + path + "'");
}

TimeSeries read_series_csv(std::istream& is, const std::string& origin) {
  std::vector<double> times, values;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    auto fail = [&](const std::string& what) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    if (comma == std::string::npos) fail("expected 'time,value'");
    double t = 0.0, v = 0.0;
    try {
      std::size_t a = 0, b = 0;
      const std::string ts = line.substr(0, comma), vs = line.substr(comma + 1);
      t = std::stod(ts, &a);
      v = std::stod(vs, &b);
      if (a != ts.size() || b != vs.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      if (line_no == 1 && times.empty()) continue;  // header
      fail("malformed row '" + line + "'");
    }
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2) throw ValidationError(origin + ": need at least two samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw ValidationError(origin + ": time must increase");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expect = times.front() + static_cast<double>(i) * dt;
    if (std::abs(times[i] - expect) > 1e-6 * dt + 1e-9 * std::abs(expect)) {
      throw ValidationError(origin + ": non-uniform sampling near t = " + std::to_string(times[i]));
    }
  }
  return TimeSeries(times.front(), dt, std::move(values));
}

TimeSeries read_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read '" + path + "'");
  return read_series_csv(is, path);
}

std::string report_json(const EstimateReport& report, int indent) {
  return to_json(report).dump(indent);
}

std::string outcome_json(const EstimateReport& linear, const EstimateReport* refined, int indent) {
  nlohmann::json j = to_json(linear);
  if (refined) j["refined"] = to_json(*refined);
  return j.dump(indent);
}

void write_text_file(const std::string& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!text.empty() && text.back() != '\n') os << '\n';
  if (!os) throw IoError("failed writing '" + path + "'");
}

void write_trace_csv(std::ostream& os, const EstimateReport& report) {
  os << "iter,h_hat,b0,b1,residual\n" << std::setprecision(12);
  for (const auto& it : report.trace) {
    os << it.iteration << ',';
    for (std::size_t k = 0; k < it.h_hat.size(); ++k) os << (k ? ";" : "") << it.h_hat[k];
    os << ',' << it.b0 << ',' << it.b1 << ',' << it.residual << '\n';
  }
}

void write_summary_csv(std::ostream& os, const ExperimentSummary& summary) {
  os << "param,mean,std,n\n" << std::setprecision(10);
  for (const auto& p : summary.params) os << p.name << ',' << p.mean << ',' << p.std << ',' << p.n << '\n';
}

std::string format_summary(const ExperimentSummary& s) {
  std::ostringstream os;
  os << "scenario " << s.scenario << "  sigma " << s.sigma << "  trials " << s.trials
     << "  failed " << s.failures.size() << "  wall " << std::fixed << std::setprecision(2)
     << s.wall_seconds << " s\n";
  os << std::defaultfloat;
  os << std::left << std::setw(10) << "param" << std::right << std::setw(14) << "mean"
     << std::setw(14) << "std" << std::setw(6) << "n" << '\n';
  for (const auto& p : s.params) {
    os << std::left << std::setw(10) << p.name << std::right << std::setprecision(6) << std::setw(14)
       << p.mean << std::setw(14) << p.std << std::setw(6) << p.n << '\n';
  }
  for (const auto& f : s.failures) os << "  seed " << f.seed << " failed: " << f.message << '\n';
  return os.str();
}

}  // namespace mfid
