// gridse: state estimation, bad-data detection and false-data-injection
// experiments on small power networks.
//
// Exit codes: 0 success, 2 input/parse errors, 3 numerical errors
// (unobservable or singular), 4 non-convergence.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gridse/attack.hpp"
#include "gridse/bad_data.hpp"
#include "gridse/error.hpp"
#include "gridse/estimator.hpp"
#include "gridse/grid_model.hpp"
#include "gridse/harness.hpp"
#include "gridse/measurement_model.hpp"
#include "gridse/report.hpp"

namespace {

using namespace gridse;

std::string vec(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt::format("{:.6g}", v(i));
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const MeasurementVector& given_z(const Case& c) {
  if (!c.z) throw Error(ErrorKind::InvalidInput, "case file carries no measurement values");
  return *c.z;
}

struct DetectorFlags {
  std::string method = "chi_square";
  double alpha = 0.05;
  std::optional<double> tau;
  double threshold = 3.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--method", method, "chi_square | norm_threshold | lnr")
        ->check(CLI::IsMember({"chi_square", "norm_threshold", "lnr"}));
    cmd->add_option("--alpha", alpha, "chi_square significance level");
    cmd->add_option("--tau", tau, "norm_threshold limit on ||r||");
    cmd->add_option("--threshold", threshold, "lnr limit on the largest normalized residual");
  }

  DetectorConfig config() const {
    DetectorConfig d;
    d.method = *parse_detector_method(method);
    d.alpha = alpha;
    d.tau = tau;
    d.lnr_threshold = threshold;
    d.validate();
    return d;
  }
};

struct Estimated {
  EstimationResult result;
  JacobianMatrix h;
};

Estimated estimate(const Case& c, const MeasurementVector& z, const std::string& mode, int max_iter) {
  const auto weights = WeightMatrix::from_config(c.config);
  if (mode == "dc") {
    auto h = dc_jacobian(c.network, c.config);
    return {estimate_dc(h, z, weights), h};
  }
  const auto y = build_admittance(c.network);
  AcOptions opt;
  opt.max_iter = max_iter;
  auto est = estimate_ac(c.network, y, z, c.config, opt, weights);
  require_converged(est);
  return {est, ac_jacobian(c.network, y, state_from_free(c.network, est.state, Mode::Ac), c.config)};
}

int run(int argc, char** argv) {
  CLI::App app{"Power-system state estimation and false data injection toolkit"};
  app.require_subcommand(1);

  std::string case_path;
  std::string mode = "dc";
  std::string format = "table";
  int max_iter = AcOptions{}.max_iter;

  auto* est_cmd = app.add_subcommand("estimate", "WLS state estimate from the case file's meter values");
  est_cmd->add_option("--case", case_path, "case file")->required();
  est_cmd->add_option("--mode", mode, "dc | ac")->check(CLI::IsMember({"dc", "ac"}));
  est_cmd->add_option("--max-iter", max_iter, "Gauss-Newton iteration budget (ac)")->check(CLI::NonNegativeNumber);

  std::vector<double> shift;
  auto* atk_cmd = app.add_subcommand("attack", "Build a = Hc and the attacked measurements z + a");
  atk_cmd->add_option("--case", case_path, "case file")->required();
  atk_cmd->add_option("--shift", shift, "state shift c1,c2,...")->required()->delimiter(',');

  std::vector<double> z_values;
  DetectorFlags det_flags;
  auto* det_cmd = app.add_subcommand("detect", "Estimate from the given z and run one bad-data test");
  det_cmd->add_option("--case", case_path, "case file")->required();
  det_cmd->add_option("--z", z_values, "measurements v1,v2,...")->required()->delimiter(',');
  det_cmd->add_option("--mode", mode, "dc | ac")->check(CLI::IsMember({"dc", "ac"}));
  det_cmd->add_option("--max-iter", max_iter, "Gauss-Newton iteration budget (ac)")->check(CLI::NonNegativeNumber);
  det_flags.add_to(det_cmd);

  std::vector<std::string> scenario_files;
  auto* scen_cmd = app.add_subcommand("scenario", "Scenario files");
  scen_cmd->require_subcommand(1);
  auto* scen_run = scen_cmd->add_subcommand("run", "Run scenario files and print a report");
  scen_run->add_option("files", scenario_files, "scenario files")->required();
  scen_run->add_option("--format", format, "table | machine")->check(CLI::IsMember({"table", "machine"}));

  std::size_t trials = 1000;
  std::string mc_attack = "none";
  double magnitude = 0.01;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  DetectorFlags mc_flags;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Detection and false-alarm rates over noisy trials");
  mc_cmd->add_option("--case", case_path, "case file")->required();
  mc_cmd->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  mc_cmd->add_option("--attack", mc_attack, "stealth | none")->check(CLI::IsMember({"stealth", "none"}));
  mc_cmd->add_option("--magnitude", magnitude, "norm of the random state shift c");
  mc_cmd->add_option("--seed", seed, "seed of trial 0; trial t uses seed + t");
  mc_cmd->add_option("--threads", threads, "worker threads (0: all cores)");
  mc_cmd->add_option("--format", format, "table | machine")->check(CLI::IsMember({"table", "machine"}));
  mc_flags.add_to(mc_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto report_format = format == "machine" ? ReportFormat::Machine : ReportFormat::Table;

  if (*est_cmd) {
    const auto c = load_case(case_path);
    const auto e = estimate(c, given_z(c), mode, max_iter);
    std::cout << "state              " << vec(e.result.state) << "\n"
              << "residual           " << vec(e.result.residual) << "\n"
              << "squared_error_raw  " << fmt::format("{:.6g}", e.result.squared_error_raw) << "\n"
              << "objective_weighted " << fmt::format("{:.6g}", e.result.objective_weighted) << "\n"
              << "iterations         " << e.result.iterations << "\n";
  } else if (*atk_cmd) {
    const auto c = load_case(case_path);
    const auto h = dc_jacobian(c.network, c.config);
    const auto a = craft_stealth_attack(h, StateShift{to_eigen(shift)});
    std::cout << "a    " << vec(a.a) << "\n";
    if (c.z) std::cout << "z_a  " << vec(apply_attack(*c.z, a)) << "\n";
  } else if (*det_cmd) {
    const auto c = load_case(case_path);
    const auto detector = det_flags.config();
    const auto z = to_eigen(z_values);
    if (static_cast<std::size_t>(z.size()) != c.config.size()) {
      throw Error(ErrorKind::LengthMismatch, fmt::format("--z has {} values, case has {} meters", z.size(),
                                                         c.config.size()));
    }
    const auto e = estimate(c, z, mode, max_iter);
    const auto r = run_detector(detector, e.h, z, WeightMatrix::from_config(c.config), e.result);
    std::cout << "method     " << to_string(detector.method) << "\n"
              << "statistic  " << fmt::format("{:.6g}", r.statistic) << "\n"
              << "threshold  " << fmt::format("{:.6g}", r.threshold_used) << "\n"
              << "verdict    " << (r.detected ? "Detected" : "Not Detected") << "\n";
    if (r.suspect_meter) {
      std::cout << "suspect    " << *r.suspect_meter + 1 << (r.ambiguous ? " (ambiguous)" : "") << "\n";
    }
    for (auto m : r.critical_meters) std::cout << "critical   " << m + 1 << "\n";
  } else if (*scen_cmd) {
    std::vector<ScenarioReport> reports;
    for (const auto& f : scenario_files) reports.push_back(run_scenario(load_scenario(f)));
    std::cout << emit_report(reports, report_format);
  } else if (*mc_cmd) {
    MonteCarloConfig config;
    config.trials = trials;
    config.noise_seed_base = seed;
    config.attack = mc_attack == "stealth" ? MonteCarloAttack::Stealth : MonteCarloAttack::None;
    config.magnitude = magnitude;
    config.detector = mc_flags.config();
    config.threads = threads;
    std::cout << emit_report(run_monte_carlo(case_path, config), report_format);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gridse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gridse::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
