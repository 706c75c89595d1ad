#pragma once

#include <optional>

#include <Eigen/Dense>

#include "gridse/grid_model.hpp"
#include "gridse/measurement_model.hpp"

namespace gridse {

/// Diagonal WLS weights, w_i = 1 / sigma_i^2.
struct WeightMatrix {
  Eigen::VectorXd diagonal;

  /// Throws InvalidInput unless every weight is positive and finite.
  explicit WeightMatrix(Eigen::VectorXd weights);

  static WeightMatrix from_sigmas(const Eigen::VectorXd& sigmas);
  static WeightMatrix from_config(const MeasurementConfig& config) { return from_sigmas(config.sigmas()); }

  Eigen::Index size() const { return diagonal.size(); }
};

struct EstimationResult {
  Eigen::VectorXd state;  // free variables, see free_vector()
  Eigen::VectorXd residual;
  double squared_error_raw = 0.0;
  double objective_weighted = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Gain matrix H^T W H.
Eigen::MatrixXd gain_matrix(const JacobianMatrix& h, const WeightMatrix& weights);

/// Closed-form DC WLS solve of the normal equations. Throws
/// UnobservableNetwork when the gain matrix is singular or ill-conditioned.
EstimationResult estimate_dc(const JacobianMatrix& h, const MeasurementVector& z, const WeightMatrix& weights);

struct AcOptions {
  std::optional<StateVector> init;  // flat start when empty
  double tol = 1e-8;
  int max_iter = 50;
};

/// Gauss-Newton AC estimation. Stops once max|dx| < tol. When the
/// iteration budget runs out the lowest-objective iterate is returned with
/// converged = false.
EstimationResult estimate_ac(const NetworkModel& network, const AdmittanceMatrix& admittance,
                             const MeasurementVector& z, const MeasurementConfig& config,
                             const AcOptions& options, const WeightMatrix& weights);

/// Throws DidNotConverge for an unconverged result.
void require_converged(const EstimationResult& result);

/// sum_i w_i (z_i - h_i)^2
double weighted_objective(const MeasurementVector& z, const MeasurementVector& h_of_x,
                          const WeightMatrix& weights);

}  // namespace gridse
