#include "gridse/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

namespace gridse {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string sig6(double v) { return fmt::format("{:.6g}", v); }

std::string join_state(const Eigen::VectorXd& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) out += ", ";
    out += sig6(x(i));
  }
  return out;
}

std::string verdict_detail(const Verdict& v) {
  return fmt::format("{} {} {} {}", to_string(v.method), sig6(v.result.statistic),
                     v.result.detected ? ">" : "<=", sig6(v.result.threshold_used));
}

ordered_json machine_row(const ScenarioReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["attacked"] = r.attacked;
  j["state"] = ordered_json::array();
  for (Eigen::Index i = 0; i < r.state.size(); ++i) j["state"].push_back(round_sig6(r.state(i)));
  j["squared_error_raw"] = round_sig6(r.squared_error_raw);
  j["objective_weighted"] = round_sig6(r.objective_weighted);
  j["verdicts"] = ordered_json::array();
  for (const auto& v : r.verdicts) {
    ordered_json jv;
    jv["method"] = std::string(to_string(v.method));
    jv["detected"] = v.result.detected;
    jv["statistic"] = round_sig6(v.result.statistic);
    jv["threshold"] = round_sig6(v.result.threshold_used);
    j["verdicts"].push_back(std::move(jv));
  }
  return j;
}

}  // namespace

double round_sig6(double value) { return std::strtod(sig6(value).c_str(), nullptr); }

std::string emit_report(std::span<const ScenarioReport> reports, ReportFormat format) {
  if (format == ReportFormat::Machine) {
    std::string out;
    for (const auto& r : reports) out += machine_row(r).dump() + "\n";
    return out;
  }

  const std::vector<std::string> header{"Case", "False Data Injection Attack", "State Variables",
                                        "Squared Error", "Bad Data Detection", "Detectors"};
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& r : reports) {
    const bool detected =
        std::any_of(r.verdicts.begin(), r.verdicts.end(), [](const Verdict& v) { return v.result.detected; });
    std::string details;
    for (const auto& v : r.verdicts) {
      if (!details.empty()) details += "; ";
      details += verdict_detail(v);
    }
    rows.push_back({r.name, r.attacked ? "Yes" : "No", join_state(r.state), sig6(r.squared_error_raw),
                    detected ? "Detected" : "Not Detected", details});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) line += " | ";
      line += fmt::format("{:<{}}", rows[r][c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::string rule;
      for (std::size_t c = 0; c < width.size(); ++c) {
        if (c) rule += "-+-";
        rule += std::string(width[c], '-');
      }
      out += rule + "\n";
    }
  }
  return out;
}

std::string emit_report(const ScenarioReport& report, ReportFormat format) {
  return emit_report(std::span<const ScenarioReport>(&report, 1), format);
}

std::string emit_report(const MonteCarloStats& s, ReportFormat format) {
  if (format == ReportFormat::Machine) {
    ordered_json j;
    j["trials"] = s.trials;
    j["detection_rate"] = round_sig6(s.detection_rate);
    j["false_alarm_rate"] = round_sig6(s.false_alarm_rate);
    j["mean_statistic"] = round_sig6(s.mean_statistic);
    j["detection_rate_ci"] = {round_sig6(s.detection_ci_low), round_sig6(s.detection_ci_high)};
    j["false_alarm_rate_ci"] = {round_sig6(s.false_alarm_ci_low), round_sig6(s.false_alarm_ci_high)};
    return j.dump() + "\n";
  }
  std::string out;
  out += fmt::format("{:<18} {}\n", "trials", s.trials);
  out += fmt::format("{:<18} {}  [{}, {}]\n", "detection_rate", sig6(s.detection_rate), sig6(s.detection_ci_low),
                     sig6(s.detection_ci_high));
  out += fmt::format("{:<18} {}  [{}, {}]\n", "false_alarm_rate", sig6(s.false_alarm_rate),
                     sig6(s.false_alarm_ci_low), sig6(s.false_alarm_ci_high));
  out += fmt::format("{:<18} {}\n", "mean_statistic", sig6(s.mean_statistic));
  return out;
}

}  // namespace gridse
