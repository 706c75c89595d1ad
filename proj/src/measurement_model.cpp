#include "gridse/measurement_model.hpp"

#include <cmath>
#include <random>

#include "gridse/error.hpp"

namespace gridse {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_magnitudes(const NetworkModel& network, const StateVector& state) {
  if (state.magnitudes.size() != network.bus_count()) {
    throw Error(ErrorKind::MissingMagnitudes, "AC evaluation needs a magnitude for every bus");
  }
  if (state.angles.size() != network.bus_count()) {
    throw Error(ErrorKind::DimensionMismatch, "state has the wrong number of angles");
  }
}

/// Series and per-end shunt parameters of the branch a flow meter sits on.
struct FlowTerms {
  double g, b, gs, bs;
};

FlowTerms flow_terms(const NetworkModel& network, const MeasurementSpec& spec) {
  const auto ob = network.find_branch(spec.from_bus, spec.to_bus);
  if (!ob) {
    throw Error(ErrorKind::DanglingReference, "no branch " + std::to_string(spec.from_bus) + "-" +
                                                  std::to_string(spec.to_bus));
  }
  const auto& br = network.branches()[ob->index];
  return {br.series_g(), br.series_b(), br.shunt_conductance_gs, br.shunt_susceptance_bs};
}

struct BranchFlow {
  double p, q;
  // Partials with respect to (delta_i, delta_j, v_i, v_j).
  double dp[4], dq[4];
};

BranchFlow branch_flow(const FlowTerms& t, double di, double dj, double vi, double vj) {
  const double th = di - dj;
  const double c = std::cos(th);
  const double s = std::sin(th);
  BranchFlow f{};
  f.p = vi * vi * (t.gs + t.g) - vi * vj * (t.g * c + t.b * s);
  f.q = -vi * vi * (t.bs + t.b) - vi * vj * (t.g * s - t.b * c);

  f.dp[0] = vi * vj * (t.g * s - t.b * c);
  f.dp[1] = -f.dp[0];
  f.dp[2] = 2.0 * vi * (t.gs + t.g) - vj * (t.g * c + t.b * s);
  f.dp[3] = -vi * (t.g * c + t.b * s);

  f.dq[0] = -vi * vj * (t.g * c + t.b * s);
  f.dq[1] = -f.dq[0];
  f.dq[2] = -2.0 * vi * (t.bs + t.b) - vj * (t.g * s - t.b * c);
  f.dq[3] = -vi * (t.g * s - t.b * c);
  return f;
}

/// Evaluates one meter and, when `row` is non-null, its Jacobian row.
double eval_meter(const NetworkModel& network, const AdmittanceMatrix& y, const StateVector& st,
                  const MeasurementSpec& spec, Eigen::RowVectorXd* row) {
  const auto n = network.bus_count();
  const auto& d = st.angles;
  const auto& v = st.magnitudes;
  auto angle_col = [&](int bus) { return network.angle_column(bus); };
  auto mag_col = [&](int bus) { return idx(network.dc_state_dim() + static_cast<std::size_t>(bus - 1)); };
  auto add_angle = [&](int bus, double val) {
    if (auto c = angle_col(bus); c && row) (*row)(idx(*c)) += val;
  };
  auto add_mag = [&](int bus, double val) {
    if (row) (*row)(mag_col(bus)) += val;
  };

  switch (spec.kind) {
    case MeasurementKind::VoltageMagnitude: {
      add_mag(spec.bus, 1.0);
      return v[static_cast<std::size_t>(spec.bus - 1)];
    }
    case MeasurementKind::InjectionP:
    case MeasurementKind::InjectionQ: {
      const bool active = spec.kind == MeasurementKind::InjectionP;
      const auto i = static_cast<std::size_t>(spec.bus - 1);
      const double vi = v[i];
      double value = 0.0;
      double d_di = 0.0;
      double d_vi = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double gij = y.g(idx(i), idx(j));
        const double bij = y.b(idx(i), idx(j));
        if (gij == 0.0 && bij == 0.0) continue;
        const double th = d[i] - d[j];
        const double c = std::cos(th);
        const double s = std::sin(th);
        // P uses (G cos + B sin), Q uses (G sin - B cos).
        const double term = active ? gij * c + bij * s : gij * s - bij * c;
        const double dterm = active ? -gij * s + bij * c : gij * c + bij * s;  // d term / d theta_ij
        value += vi * v[j] * term;
        if (j == i) {
          d_vi += 2.0 * vi * term;
          continue;
        }
        d_vi += v[j] * term;
        d_di += vi * v[j] * dterm;
        add_angle(static_cast<int>(j + 1), -vi * v[j] * dterm);
        add_mag(static_cast<int>(j + 1), vi * term);
      }
      add_angle(spec.bus, d_di);
      add_mag(spec.bus, d_vi);
      return value;
    }
    case MeasurementKind::FlowP:
    case MeasurementKind::FlowQ:
    case MeasurementKind::CurrentMagnitude: {
      const auto i = static_cast<std::size_t>(spec.from_bus - 1);
      const auto j = static_cast<std::size_t>(spec.to_bus - 1);
      const auto f = branch_flow(flow_terms(network, spec), d[i], d[j], v[i], v[j]);
      double grad[4];
      double value;
      if (spec.kind == MeasurementKind::FlowP) {
        value = f.p;
        std::copy(std::begin(f.dp), std::end(f.dp), grad);
      } else if (spec.kind == MeasurementKind::FlowQ) {
        value = f.q;
        std::copy(std::begin(f.dq), std::end(f.dq), grad);
      } else {
        const double apparent = std::hypot(f.p, f.q);
        value = apparent / v[i];
        for (int k = 0; k < 4; ++k) {
          grad[k] = apparent > 0.0 ? (f.p * f.dp[k] + f.q * f.dq[k]) / (apparent * v[i]) : 0.0;
        }
        grad[2] -= apparent / (v[i] * v[i]);
      }
      add_angle(spec.from_bus, grad[0]);
      add_angle(spec.to_bus, grad[1]);
      add_mag(spec.from_bus, grad[2]);
      add_mag(spec.to_bus, grad[3]);
      return value;
    }
  }
  return 0.0;
}

}  // namespace

StateVector StateVector::flat(const NetworkModel& network, bool with_magnitudes) {
  StateVector s;
  s.angles.assign(network.bus_count(), 0.0);
  if (with_magnitudes) s.magnitudes.assign(network.bus_count(), 1.0);
  return s;
}

Eigen::VectorXd free_vector(const NetworkModel& network, const StateVector& state) {
  if (state.angles.size() != network.bus_count()) {
    throw Error(ErrorKind::DimensionMismatch, "state has the wrong number of angles");
  }
  const std::size_t k = network.dc_state_dim();
  Eigen::VectorXd x(idx(k + state.magnitudes.size()));
  for (const auto& b : network.buses()) {
    if (auto c = network.angle_column(b.id)) x(idx(*c)) = state.angles[static_cast<std::size_t>(b.id - 1)];
  }
  for (std::size_t i = 0; i < state.magnitudes.size(); ++i) x(idx(k + i)) = state.magnitudes[i];
  return x;
}

StateVector state_from_free(const NetworkModel& network, const Eigen::VectorXd& x, Mode mode) {
  const std::size_t expected = mode == Mode::Dc ? network.dc_state_dim() : network.ac_state_dim();
  if (static_cast<std::size_t>(x.size()) != expected) {
    throw Error(ErrorKind::DimensionMismatch, "free vector has length " + std::to_string(x.size()) +
                                                  ", expected " + std::to_string(expected));
  }
  StateVector s = StateVector::flat(network, false);
  for (const auto& b : network.buses()) {
    if (auto c = network.angle_column(b.id)) s.angles[static_cast<std::size_t>(b.id - 1)] = x(idx(*c));
  }
  if (mode == Mode::Ac) {
    const std::size_t k = network.dc_state_dim();
    s.magnitudes.resize(network.bus_count());
    for (std::size_t i = 0; i < network.bus_count(); ++i) s.magnitudes[i] = x(idx(k + i));
  }
  return s;
}

JacobianMatrix dc_jacobian(const NetworkModel& network, const MeasurementConfig& config) {
  const auto m = config.size();
  JacobianMatrix h = JacobianMatrix::Zero(idx(m), idx(network.dc_state_dim()));
  auto add_flow = [&](Eigen::Index row, int from, int to, double x) {
    if (auto c = network.angle_column(from)) h(row, idx(*c)) += 1.0 / x;
    if (auto c = network.angle_column(to)) h(row, idx(*c)) -= 1.0 / x;
  };
  for (std::size_t r = 0; r < m; ++r) {
    const auto& spec = config.specs[r];
    switch (spec.kind) {
      case MeasurementKind::FlowP: {
        const auto ob = network.find_branch(spec.from_bus, spec.to_bus);
        if (!ob) {
          throw Error(ErrorKind::DanglingReference, "no branch " + std::to_string(spec.from_bus) + "-" +
                                                        std::to_string(spec.to_bus));
        }
        add_flow(idx(r), spec.from_bus, spec.to_bus, network.branches()[ob->index].reactance_x);
        break;
      }
      case MeasurementKind::InjectionP:
        for (const auto& br : network.branches()) {
          if (br.from_bus == spec.bus) add_flow(idx(r), br.from_bus, br.to_bus, br.reactance_x);
          if (br.to_bus == spec.bus) add_flow(idx(r), br.to_bus, br.from_bus, br.reactance_x);
        }
        break;
      default:
        throw Error(ErrorKind::UnsupportedKindForDC,
                    "measurement " + std::to_string(r + 1) + " (" + std::string(to_string(spec.kind)) +
                        ") has no DC model");
    }
  }
  return h;
}

MeasurementVector h_eval_dc(const NetworkModel& network, const StateVector& state,
                            const MeasurementConfig& config) {
  StateVector angles_only{state.angles, {}};
  return dc_jacobian(network, config) * free_vector(network, angles_only);
}

MeasurementVector h_eval_ac(const NetworkModel& network, const AdmittanceMatrix& admittance,
                            const StateVector& state, const MeasurementConfig& config) {
  require_magnitudes(network, state);
  MeasurementVector z(idx(config.size()));
  for (std::size_t r = 0; r < config.size(); ++r) {
    z(idx(r)) = eval_meter(network, admittance, state, config.specs[r], nullptr);
  }
  return z;
}

JacobianMatrix ac_jacobian(const NetworkModel& network, const AdmittanceMatrix& admittance,
                           const StateVector& state, const MeasurementConfig& config) {
  require_magnitudes(network, state);
  JacobianMatrix h = JacobianMatrix::Zero(idx(config.size()), idx(network.ac_state_dim()));
  for (std::size_t r = 0; r < config.size(); ++r) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(h.cols());
    eval_meter(network, admittance, state, config.specs[r], &row);
    h.row(idx(r)) = row;
  }
  return h;
}

double meter_noise(std::uint64_t seed, std::size_t meter_index, double sigma) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(meter_index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(meter_index) >> 32)};
  std::mt19937_64 gen(seq);
  std::normal_distribution<double> normal(0.0, sigma);
  return normal(gen);
}

MeasurementVector simulate_measurements(const NetworkModel& network, const AdmittanceMatrix& admittance,
                                        const StateVector& true_state, const MeasurementConfig& config,
                                        Mode mode, std::uint64_t seed, double noise_scale) {
  MeasurementVector z = mode == Mode::Dc ? h_eval_dc(network, true_state, config)
                                         : h_eval_ac(network, admittance, true_state, config);
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (noise_scale == 0.0) break;
    z(idx(i)) += meter_noise(seed, i, noise_scale * config.specs[i].sigma);
  }
  return z;
}

}  // namespace gridse
