#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mfid/batch.hpp"
#include "mfid/pipeline.hpp"
#include "mfid/time_series.hpp"

namespace mfid {

/// `time,value` rows over the valid range, 12+ significant digits.
void write_series_csv(std::ostream& os, const TimeSeries& ts);
void write_series_csv(const std::string& path, const TimeSeries& ts);

/// Reads `time,value` rows (header optional); the grid must be uniform.
TimeSeries read_series_csv(std::istream& is, const std::string& origin = "<csv>");
TimeSeries read_series_csv(const std::string& path);

/// {a, b, h, state, state_time, residual, cost, status, message, trace}.
std::string report_json(const EstimateReport& report, int indent = 2);
/// Linear report plus optional refined report under "refined".
std::string outcome_json(const EstimateReport& linear, const EstimateReport* refined, int indent = 2);
void write_text_file(const std::string& path, const std::string& text);

/// `iter,h_hat,b0,b1,residual`; two-delay traces put both delays in h_hat separated by ';'.
void write_trace_csv(std::ostream& os, const EstimateReport& report);

/// `param,mean,std,n`
void write_summary_csv(std::ostream& os, const ExperimentSummary& summary);
/// Aligned table with a header naming scenario, sigma, trials, failures, wall time.
std::string format_summary(const ExperimentSummary& summary);

}  // namespace mfid
