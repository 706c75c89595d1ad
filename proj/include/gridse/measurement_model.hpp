#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gridse/grid_model.hpp"

namespace gridse {

/// Bus angles (radians) and voltage magnitudes (pu), indexed by bus id - 1.
/// The reference angle is 0. `magnitudes` is empty for a DC state.
struct StateVector {
  std::vector<double> angles;
  std::vector<double> magnitudes;

  bool has_magnitudes() const { return !magnitudes.empty(); }

  static StateVector flat(const NetworkModel& network, bool with_magnitudes);
};

enum class Mode { Dc, Ac };

/// Free variables in state order: non-reference angles ascending by id,
/// then (AC only) all magnitudes ascending by id.
Eigen::VectorXd free_vector(const NetworkModel& network, const StateVector& state);
StateVector state_from_free(const NetworkModel& network, const Eigen::VectorXd& x, Mode mode);

/// Constant DC Jacobian. Only flow_p and injection_p are accepted.
JacobianMatrix dc_jacobian(const NetworkModel& network, const MeasurementConfig& config);

/// DC measurement functions: H times the free angle vector.
MeasurementVector h_eval_dc(const NetworkModel& network, const StateVector& state,
                            const MeasurementConfig& config);

MeasurementVector h_eval_ac(const NetworkModel& network, const AdmittanceMatrix& admittance,
                            const StateVector& state, const MeasurementConfig& config);

/// Analytic dh/dx at `state`, columns in free-variable order.
JacobianMatrix ac_jacobian(const NetworkModel& network, const AdmittanceMatrix& admittance,
                           const StateVector& state, const MeasurementConfig& config);

/// z = h(true_state) + e with e_i ~ N(0, sigma_i^2). Each meter draws from
/// its own stream keyed on (seed, meter index). `noise_scale` multiplies
/// every sigma; 0 gives the noiseless h(true_state).
MeasurementVector simulate_measurements(const NetworkModel& network, const AdmittanceMatrix& admittance,
                                        const StateVector& true_state, const MeasurementConfig& config,
                                        Mode mode, std::uint64_t seed, double noise_scale = 1.0);

/// Noise draw for a single meter; exposed so callers can reproduce a stream.
double meter_noise(std::uint64_t seed, std::size_t meter_index, double sigma);

}  // namespace gridse
