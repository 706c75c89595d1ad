#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "gridse/attack.hpp"
#include "gridse/bad_data.hpp"
#include "gridse/grid_model.hpp"
#include "gridse/measurement_model.hpp"

namespace gridse {

// Where a scenario's z comes from.
struct CaseValues {};
struct ExplicitMeasurements {
  Eigen::VectorXd z;
};
struct SimulatedMeasurements {
  StateVector true_state;
  std::uint64_t seed = 0;
  bool noisy = true;  // false: sigma treated as 0
};
using MeasurementSource = std::variant<CaseValues, ExplicitMeasurements, SimulatedMeasurements>;

// Attack recipes. Meter indices are 0-based in memory, 1-based in files.
struct NoAttack {};
struct ExplicitDeltas {
  Eigen::VectorXd deltas;
};
struct ReplacementValues {
  Eigen::VectorXd values;
};
struct StealthShiftAttack {
  Eigen::VectorXd c;
};
struct RandomStealthAttack {
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};
struct ConstrainedAttack {
  std::vector<std::size_t> accessible;
  double magnitude = kDefaultConstrainedMagnitude;
};
using AttackSpec =
    std::variant<NoAttack, ExplicitDeltas, ReplacementValues, StealthShiftAttack, RandomStealthAttack, ConstrainedAttack>;

struct Scenario {
  std::string name;
  std::filesystem::path case_path;
  MeasurementSource measurements = CaseValues{};
  AttackSpec attack = NoAttack{};
  std::vector<DetectorConfig> detectors;  // empty: chi_square, alpha 0.05
  Mode mode = Mode::Dc;
};

/// `base_dir` resolves a relative `case` path.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

struct Verdict {
  DetectorMethod method = DetectorMethod::ChiSquare;
  DetectionResult result;
};

struct ScenarioReport {
  std::string name;
  bool attacked = false;
  Eigen::VectorXd state;  // free variables
  double squared_error_raw = 0.0;
  double objective_weighted = 0.0;
  std::vector<Verdict> verdicts;
};

/// Builds z, applies the attack, estimates and runs every detector.
ScenarioReport run_scenario(const Scenario& scenario);
ScenarioReport run_scenario(const Scenario& scenario, const Case& grid_case);

enum class MonteCarloAttack { None, Stealth };

struct MonteCarloConfig {
  std::size_t trials = 1000;
  std::uint64_t noise_seed_base = 1;
  MonteCarloAttack attack = MonteCarloAttack::None;
  double magnitude = 0.01;
  DetectorConfig detector;
  double noise_scale = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct MonteCarloTrial {
  double clean_statistic = 0.0;
  double attacked_statistic = 0.0;
  bool false_alarm = false;
  bool detected = false;
};

struct MonteCarloStats {
  std::size_t trials = 0;
  double detection_rate = 0.0;
  double false_alarm_rate = 0.0;
  double mean_statistic = 0.0;  // attacked arm
  double detection_ci_low = 0.0;
  double detection_ci_high = 0.0;
  double false_alarm_ci_low = 0.0;
  double false_alarm_ci_high = 0.0;
};

/// Wilson score 95% interval for `successes` out of `trials`.
std::pair<double, double> binomial_interval(std::size_t successes, std::size_t trials);

/// Per-trial records, in trial order. Trial t uses seed noise_seed_base + t
/// for both the noise and the random stealth direction.
std::vector<MonteCarloTrial> run_monte_carlo_trials(const Case& grid_case, const MonteCarloConfig& config);

MonteCarloStats summarize(const std::vector<MonteCarloTrial>& trials);

MonteCarloStats run_monte_carlo(const Case& grid_case, const MonteCarloConfig& config);
MonteCarloStats run_monte_carlo(const std::filesystem::path& case_path, const MonteCarloConfig& config);

}  // namespace gridse
