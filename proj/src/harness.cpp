#include "gridse/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "gridse/error.hpp"
#include "gridse/estimator.hpp"
#include "json_util.hpp"

namespace gridse {

namespace {

using detail::json;
using detail::malformed;
using detail::read_number;
using detail::read_vector;
using detail::require_keys;

std::uint64_t read_seed(const json& obj, std::string_view where) {
  const auto& v = obj.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    malformed(std::string(where) + ".seed must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

MeasurementSource parse_measurements(const json& jm) {
  require_keys(jm, "measurements", {}, {"z", "simulate"});
  if (jm.contains("z") == jm.contains("simulate")) {
    malformed("measurements needs exactly one of 'z' or 'simulate'");
  }
  if (jm.contains("z")) return ExplicitMeasurements{read_vector(jm, "z", "measurements")};

  const auto& js = jm.at("simulate");
  require_keys(js, "simulate", {"angles", "seed"}, {"magnitudes", "noise"});
  SimulatedMeasurements sim;
  sim.true_state.angles = to_std(read_vector(js, "angles", "simulate"));
  if (js.contains("magnitudes")) sim.true_state.magnitudes = to_std(read_vector(js, "magnitudes", "simulate"));
  sim.seed = read_seed(js, "simulate");
  if (js.contains("noise")) {
    const auto& noise = js.at("noise");
    if (noise == "file") {
      sim.noisy = true;
    } else if (noise == "none") {
      sim.noisy = false;
    } else {
      malformed("simulate.noise must be \"file\" or \"none\"");
    }
  }
  return sim;
}

AttackSpec parse_attack(const json& ja) {
  if (!ja.is_object() || !ja.contains("kind") || !ja.at("kind").is_string()) {
    malformed("attack needs a string 'kind'");
  }
  const auto kind = ja.at("kind").get<std::string>();
  if (kind == "none") {
    require_keys(ja, "attack", {"kind"}, {});
    return NoAttack{};
  }
  if (kind == "explicit_deltas") {
    require_keys(ja, "attack", {"kind", "deltas"}, {});
    return ExplicitDeltas{read_vector(ja, "deltas", "attack")};
  }
  if (kind == "replace") {
    require_keys(ja, "attack", {"kind", "values"}, {});
    return ReplacementValues{read_vector(ja, "values", "attack")};
  }
  if (kind == "stealth_shift") {
    require_keys(ja, "attack", {"kind", "c"}, {});
    return StealthShiftAttack{read_vector(ja, "c", "attack")};
  }
  if (kind == "random_stealth") {
    require_keys(ja, "attack", {"kind", "magnitude", "seed"}, {});
    return RandomStealthAttack{read_number(ja, "magnitude", "attack", 0.0), read_seed(ja, "attack")};
  }
  if (kind == "constrained") {
    require_keys(ja, "attack", {"kind", "accessible"}, {"magnitude"});
    ConstrainedAttack out;
    const auto& acc = ja.at("accessible");
    if (!acc.is_array()) malformed("attack.accessible must be an array of meter numbers");
    for (const auto& m : acc) {
      if (!m.is_number_integer() || m.get<int>() < 1) malformed("attack.accessible entries are 1-based meter numbers");
      out.accessible.push_back(static_cast<std::size_t>(m.get<int>() - 1));
    }
    out.magnitude = read_number(ja, "magnitude", "attack", kDefaultConstrainedMagnitude);
    return out;
  }
  malformed("unknown attack kind '" + kind + "'");
}

DetectorConfig parse_detector(const json& jd) {
  if (!jd.is_object() || !jd.contains("method") || !jd.at("method").is_string()) {
    malformed("detector needs a string 'method'");
  }
  const auto name = jd.at("method").get<std::string>();
  const auto method = parse_detector_method(name);
  if (!method) malformed("unknown detector method '" + name + "'");
  DetectorConfig d;
  d.method = *method;
  switch (*method) {
    case DetectorMethod::NormThreshold:
      require_keys(jd, "detector", {"method", "tau"}, {});
      d.tau = read_number(jd, "tau", "detector", 0.0);
      break;
    case DetectorMethod::ChiSquare:
      require_keys(jd, "detector", {"method"}, {"alpha"});
      d.alpha = read_number(jd, "alpha", "detector", 0.05);
      break;
    case DetectorMethod::Lnr:
      require_keys(jd, "detector", {"method"}, {"threshold"});
      d.lnr_threshold = read_number(jd, "threshold", "detector", 3.0);
      break;
  }
  d.validate();
  return d;
}

void require_size(Eigen::Index got, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(got) != expected) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has " + std::to_string(got) +
                                                  " entries, expected " + std::to_string(expected));
  }
}

MeasurementVector build_z(const Scenario& s, const Case& c, const AdmittanceMatrix& y) {
  const std::size_t m = c.config.size();
  return std::visit(
      [&](const auto& src) -> MeasurementVector {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, CaseValues>) {
          if (!c.z) throw Error(ErrorKind::InvalidInput, "case file carries no measurement values");
          return *c.z;
        } else if constexpr (std::is_same_v<T, ExplicitMeasurements>) {
          require_size(src.z.size(), m, "measurements.z");
          return src.z;
        } else {
          require_size(static_cast<Eigen::Index>(src.true_state.angles.size()), c.network.bus_count(),
                       "simulate.angles");
          return simulate_measurements(c.network, y, src.true_state, c.config, s.mode, src.seed,
                                       src.noisy ? 1.0 : 0.0);
        }
      },
      s.measurements);
}

Eigen::VectorXd attack_delta(const Scenario& s, const Case& c, const MeasurementVector& z) {
  const std::size_t m = c.config.size();
  const bool dc = s.mode == Mode::Dc;
  auto dc_h = [&] {
    if (!dc) throw Error(ErrorKind::InvalidInput, "stealth attacks are defined for DC scenarios only");
    return dc_jacobian(c.network, c.config);
  };
  return std::visit(
      [&](const auto& atk) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(atk)>;
        if constexpr (std::is_same_v<T, NoAttack>) {
          return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
        } else if constexpr (std::is_same_v<T, ExplicitDeltas>) {
          require_size(atk.deltas.size(), m, "attack.deltas");
          return atk.deltas;
        } else if constexpr (std::is_same_v<T, ReplacementValues>) {
          require_size(atk.values.size(), m, "attack.values");
          return atk.values - z;
        } else if constexpr (std::is_same_v<T, StealthShiftAttack>) {
          return craft_stealth_attack(dc_h(), StateShift{atk.c}).a;
        } else if constexpr (std::is_same_v<T, RandomStealthAttack>) {
          return random_stealth_attack(dc_h(), atk.magnitude, atk.seed).attack.a;
        } else {
          auto found = constrained_stealth_attack(dc_h(), atk.accessible, atk.magnitude);
          // No feasible direction: the attacker cannot act.
          return found ? found->attack.a : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
        }
      },
      s.attack);
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  require_keys(doc, "scenario", {"name", "case"}, {"measurements", "attack", "detectors", "mode"});
  Scenario s;
  if (!doc.at("name").is_string() || !doc.at("case").is_string()) {
    malformed("scenario name and case must be strings");
  }
  s.name = doc.at("name").get<std::string>();
  std::filesystem::path case_path = doc.at("case").get<std::string>();
  s.case_path = case_path.is_absolute() ? case_path : base_dir / case_path;
  if (doc.contains("measurements")) s.measurements = parse_measurements(doc.at("measurements"));
  if (doc.contains("attack")) s.attack = parse_attack(doc.at("attack"));
  if (doc.contains("detectors")) {
    if (!doc.at("detectors").is_array()) malformed("scenario.detectors must be an array");
    for (const auto& jd : doc.at("detectors")) s.detectors.push_back(parse_detector(jd));
  }
  if (doc.contains("mode")) {
    const auto& mode = doc.at("mode");
    if (mode == "dc") {
      s.mode = Mode::Dc;
    } else if (mode == "ac") {
      s.mode = Mode::Ac;
    } else {
      malformed("scenario.mode must be \"dc\" or \"ac\"");
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

ScenarioReport run_scenario(const Scenario& scenario) {
  return run_scenario(scenario, load_case(scenario.case_path));
}

ScenarioReport run_scenario(const Scenario& scenario, const Case& c) {
  const auto y = build_admittance(c.network);
  const auto weights = WeightMatrix::from_config(c.config);
  const MeasurementVector z = build_z(scenario, c, y);
  const Eigen::VectorXd delta = attack_delta(scenario, c, z);
  const MeasurementVector za = z + delta;

  EstimationResult est;
  JacobianMatrix h;
  if (scenario.mode == Mode::Dc) {
    h = dc_jacobian(c.network, c.config);
    est = estimate_dc(h, za, weights);
  } else {
    est = estimate_ac(c.network, y, za, c.config, AcOptions{}, weights);
    require_converged(est);
    h = ac_jacobian(c.network, y, state_from_free(c.network, est.state, Mode::Ac), c.config);
  }

  ScenarioReport report;
  report.name = scenario.name;
  report.attacked = !std::holds_alternative<NoAttack>(scenario.attack);
  report.state = est.state;
  report.squared_error_raw = est.squared_error_raw;
  report.objective_weighted = est.objective_weighted;
  std::vector<DetectorConfig> detectors = scenario.detectors;
  if (detectors.empty()) detectors.push_back(DetectorConfig{});
  for (const auto& d : detectors) {
    report.verdicts.push_back({d.method, run_detector(d, h, za, weights, est)});
  }
  return report;
}

std::pair<double, double> binomial_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // Clamp so rounding never pushes the point estimate outside the interval.
  return {std::min(p, std::max(0.0, center - half)), std::max(p, std::min(1.0, center + half))};
}

std::vector<MonteCarloTrial> run_monte_carlo_trials(const Case& c, const MonteCarloConfig& config) {
  if (config.trials < 1) throw Error(ErrorKind::InvalidInput, "Monte Carlo needs at least one trial");
  config.detector.validate();
  const auto h = dc_jacobian(c.network, c.config);
  const auto weights = WeightMatrix::from_config(c.config);
  const auto y = build_admittance(c.network);

  StateVector truth = StateVector::flat(c.network, false);
  if (c.z) truth = state_from_free(c.network, estimate_dc(h, *c.z, weights).state, Mode::Dc);

  std::vector<MonteCarloTrial> trials(config.trials);
  auto run_one = [&](std::size_t t) {
    const std::uint64_t seed = config.noise_seed_base + t;
    const auto z = simulate_measurements(c.network, y, truth, c.config, Mode::Dc, seed, config.noise_scale);
    const auto clean_est = estimate_dc(h, z, weights);
    const auto clean = run_detector(config.detector, h, z, weights, clean_est);
    MonteCarloTrial& out = trials[t];
    out.clean_statistic = clean.statistic;
    out.false_alarm = clean.detected;
    if (config.attack == MonteCarloAttack::Stealth) {
      const auto atk = random_stealth_attack(h, config.magnitude, seed);
      const auto za = apply_attack(z, atk.attack);
      const auto est = estimate_dc(h, za, weights);
      const auto attacked = run_detector(config.detector, h, za, weights, est);
      out.attacked_statistic = attacked.statistic;
      out.detected = attacked.detected;
    } else {
      out.attacked_statistic = clean.statistic;
      out.detected = clean.detected;
    }
  };

  unsigned workers = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, config.trials));
  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < config.trials; t += workers) run_one(t);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return trials;
}

MonteCarloStats summarize(const std::vector<MonteCarloTrial>& trials) {
  MonteCarloStats s;
  s.trials = trials.size();
  std::size_t detected = 0;
  std::size_t false_alarms = 0;
  double sum = 0.0;
  for (const auto& t : trials) {
    detected += t.detected ? 1 : 0;
    false_alarms += t.false_alarm ? 1 : 0;
    sum += t.attacked_statistic;
  }
  if (s.trials == 0) return s;
  const double n = static_cast<double>(s.trials);
  s.detection_rate = static_cast<double>(detected) / n;
  s.false_alarm_rate = static_cast<double>(false_alarms) / n;
  s.mean_statistic = sum / n;
  std::tie(s.detection_ci_low, s.detection_ci_high) = binomial_interval(detected, s.trials);
  std::tie(s.false_alarm_ci_low, s.false_alarm_ci_high) = binomial_interval(false_alarms, s.trials);
  return s;
}

MonteCarloStats run_monte_carlo(const Case& grid_case, const MonteCarloConfig& config) {
  return summarize(run_monte_carlo_trials(grid_case, config));
}

MonteCarloStats run_monte_carlo(const std::filesystem::path& case_path, const MonteCarloConfig& config) {
  return run_monte_carlo(load_case(case_path), config);
}

}  // namespace gridse
