#pragma once

#include <span>
#include <string>

#include "gridse/harness.hpp"

namespace gridse {

enum class ReportFormat { Table, Machine };

// All numbers are written with 6 significant digits.
//
// Machine scenario report keys, in order:
//   name, attacked, state, squared_error_raw, objective_weighted,
//   verdicts: [{method, detected, statistic, threshold}]
// Machine Monte Carlo keys, in order:
//   trials, detection_rate, false_alarm_rate, mean_statistic,
//   detection_rate_ci: [low, high], false_alarm_rate_ci: [low, high]

/// Table: a header plus one row per report. Machine: one JSON object per
/// report, one per line.
std::string emit_report(std::span<const ScenarioReport> reports, ReportFormat format);
std::string emit_report(const ScenarioReport& report, ReportFormat format);
std::string emit_report(const MonteCarloStats& stats, ReportFormat format);

/// Value rounded to 6 significant digits, as written in reports.
double round_sig6(double value);

}  // namespace gridse
