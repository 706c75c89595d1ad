#include "gridse/estimator.hpp"

#include <cmath>
#include <string>

#include "gridse/error.hpp"
#include "gridse/linalg.hpp"

namespace gridse {

namespace {

void require_length(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

WeightMatrix::WeightMatrix(Eigen::VectorXd weights) : diagonal(std::move(weights)) {
  for (Eigen::Index i = 0; i < diagonal.size(); ++i) {
    if (!(diagonal(i) > 0.0) || !std::isfinite(diagonal(i))) {
      throw Error(ErrorKind::InvalidInput, "weight " + std::to_string(i + 1) + " is not positive and finite");
    }
  }
}

WeightMatrix WeightMatrix::from_sigmas(const Eigen::VectorXd& sigmas) {
  return WeightMatrix(sigmas.array().square().inverse().matrix());
}

Eigen::MatrixXd gain_matrix(const JacobianMatrix& h, const WeightMatrix& weights) {
  require_length(h.rows(), weights.size(), "Jacobian rows vs weights");
  return h.transpose() * weights.diagonal.asDiagonal() * h;
}

EstimationResult estimate_dc(const JacobianMatrix& h, const MeasurementVector& z, const WeightMatrix& weights) {
  require_length(h.rows(), z.size(), "Jacobian rows vs measurements");
  const auto gain = factor_gain(gain_matrix(h, weights));

  EstimationResult out;
  out.state = gain.solve(h.transpose() * weights.diagonal.asDiagonal() * z);
  out.residual = z - h * out.state;
  out.squared_error_raw = out.residual.squaredNorm();
  out.objective_weighted = out.residual.dot(weights.diagonal.asDiagonal() * out.residual);
  out.converged = true;
  out.iterations = 1;
  return out;
}

EstimationResult estimate_ac(const NetworkModel& network, const AdmittanceMatrix& admittance,
                             const MeasurementVector& z, const MeasurementConfig& config,
                             const AcOptions& options, const WeightMatrix& weights) {
  require_length(static_cast<Eigen::Index>(config.size()), z.size(), "meters vs measurements");
  require_length(z.size(), weights.size(), "measurements vs weights");

  const StateVector init = options.init.value_or(StateVector::flat(network, true));
  Eigen::VectorXd x = free_vector(network, init);
  if (static_cast<std::size_t>(x.size()) != network.ac_state_dim()) {
    throw Error(ErrorKind::MissingMagnitudes, "AC initial state needs every magnitude");
  }

  auto objective_at = [&](const Eigen::VectorXd& at) {
    return weighted_objective(z, h_eval_ac(network, admittance, state_from_free(network, at, Mode::Ac), config),
                              weights);
  };

  Eigen::VectorXd best = x;
  double best_objective = objective_at(x);
  bool converged = false;
  int iterations = 0;
  for (; iterations < options.max_iter && !converged;) {
    const auto state = state_from_free(network, x, Mode::Ac);
    const auto h = ac_jacobian(network, admittance, state, config);
    const Eigen::VectorXd r = z - h_eval_ac(network, admittance, state, config);
    const auto gain = factor_gain(gain_matrix(h, weights));
    const Eigen::VectorXd dx = gain.solve(h.transpose() * weights.diagonal.asDiagonal() * r);
    x += dx;
    ++iterations;
    converged = dx.lpNorm<Eigen::Infinity>() < options.tol;

    const double obj = objective_at(x);
    if (obj <= best_objective) {
      best_objective = obj;
      best = x;
    }
  }

  EstimationResult out;
  out.state = converged ? x : best;
  out.residual = z - h_eval_ac(network, admittance, state_from_free(network, out.state, Mode::Ac), config);
  out.squared_error_raw = out.residual.squaredNorm();
  out.objective_weighted = out.residual.dot(weights.diagonal.asDiagonal() * out.residual);
  out.converged = converged;
  out.iterations = iterations;
  return out;
}

void require_converged(const EstimationResult& result) {
  if (!result.converged) {
    throw Error(ErrorKind::DidNotConverge,
                "no convergence after " + std::to_string(result.iterations) + " iterations");
  }
}

double weighted_objective(const MeasurementVector& z, const MeasurementVector& h_of_x,
                          const WeightMatrix& weights) {
  require_length(z.size(), h_of_x.size(), "measurements vs h(x)");
  require_length(z.size(), weights.size(), "measurements vs weights");
  const Eigen::VectorXd r = z - h_of_x;
  return r.dot(weights.diagonal.asDiagonal() * r);
}

}  // namespace gridse
