#include "gridse/bad_data.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "gridse/error.hpp"
#include "gridse/linalg.hpp"

namespace gridse {

std::string_view to_string(DetectorMethod method) {
  switch (method) {
    case DetectorMethod::NormThreshold: return "norm_threshold";
    case DetectorMethod::ChiSquare: return "chi_square";
    case DetectorMethod::Lnr: return "lnr";
  }
  return "unknown";
}

std::optional<DetectorMethod> parse_detector_method(std::string_view name) {
  for (auto m : {DetectorMethod::NormThreshold, DetectorMethod::ChiSquare, DetectorMethod::Lnr}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

void DetectorConfig::validate() const {
  switch (method) {
    case DetectorMethod::NormThreshold:
      if (!tau || !(*tau > 0.0)) throw Error(ErrorKind::InvalidInput, "norm_threshold needs tau > 0");
      break;
    case DetectorMethod::ChiSquare:
      if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in (0, 1)");
      break;
    case DetectorMethod::Lnr:
      if (!(lnr_threshold > 0.0)) throw Error(ErrorKind::InvalidInput, "lnr threshold must be positive");
      break;
  }
}

Eigen::VectorXd residual(const MeasurementVector& z, const MeasurementVector& h_of_x) {
  if (z.size() != h_of_x.size()) {
    throw Error(ErrorKind::LengthMismatch, "z has " + std::to_string(z.size()) + " entries, h(x) has " +
                                               std::to_string(h_of_x.size()));
  }
  return z - h_of_x;
}

DetectionResult norm_threshold_test(const Eigen::VectorXd& r, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidInput, "tau must be positive");
  DetectionResult out;
  out.statistic = r.norm();
  out.threshold_used = tau;
  out.detected = out.statistic > tau;
  return out;
}

double chi_square_quantile(double dof, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidInput, "alpha must lie in (0, 1)");
  if (!(dof > 0.0)) throw Error(ErrorKind::NoRedundancy, "chi-square needs positive degrees of freedom");
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, alpha));
}

DetectionResult chi_square_test(const MeasurementVector& z, const MeasurementVector& h_of_x,
                                const WeightMatrix& weights, std::size_t state_dim, double alpha) {
  const auto m = static_cast<std::size_t>(z.size());
  if (m <= state_dim) {
    throw Error(ErrorKind::NoRedundancy, std::to_string(m) + " meters for " + std::to_string(state_dim) +
                                             " state variables");
  }
  DetectionResult out;
  out.statistic = weighted_objective(z, h_of_x, weights);
  out.threshold_used = chi_square_quantile(static_cast<double>(m - state_dim), alpha);
  out.detected = out.statistic > out.threshold_used;
  return out;
}

Eigen::MatrixXd residual_sensitivity(const JacobianMatrix& h, const WeightMatrix& weights) {
  const auto gain = factor_gain(gain_matrix(h, weights));
  const Eigen::MatrixXd ht_w = h.transpose() * weights.diagonal.asDiagonal();
  return Eigen::MatrixXd::Identity(h.rows(), h.rows()) - h * gain.solve(ht_w);
}

Eigen::VectorXd normalized_residuals(const JacobianMatrix& h, const WeightMatrix& weights,
                                     const Eigen::VectorXd& r) {
  if (r.size() != h.rows()) throw Error(ErrorKind::LengthMismatch, "residual length vs Jacobian rows");
  const Eigen::MatrixXd s = residual_sensitivity(h, weights);
  Eigen::VectorXd out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    // R is diagonal, so Omega_ii = S_ii * sigma_i^2.
    const double s_ii = s(i, i);
    out(i) = s_ii <= kCriticalSensitivity ? std::numeric_limits<double>::quiet_NaN()
                                          : std::abs(r(i)) / std::sqrt(s_ii / weights.diagonal(i));
  }
  return out;
}

DetectionResult largest_normalized_residual(const JacobianMatrix& h, const MeasurementVector& z,
                                            const WeightMatrix& weights, const EstimationResult& estimate,
                                            double lnr_threshold) {
  if (z.size() != h.rows() || estimate.residual.size() != h.rows()) {
    throw Error(ErrorKind::LengthMismatch, "z, residual and Jacobian rows must agree");
  }
  if (h.rows() <= h.cols()) {
    throw Error(ErrorKind::NoRedundancy, std::to_string(h.rows()) + " meters for " +
                                             std::to_string(h.cols()) + " state variables");
  }
  const Eigen::VectorXd rn = normalized_residuals(h, weights, estimate.residual);

  DetectionResult out;
  out.threshold_used = lnr_threshold;
  double best = -1.0;
  for (Eigen::Index i = 0; i < rn.size(); ++i) {
    if (std::isnan(rn(i))) {
      out.critical_meters.push_back(static_cast<std::size_t>(i));
    } else {
      best = std::max(best, rn(i));
    }
  }
  // Ties go to the lowest meter index and mark the result ambiguous.
  for (Eigen::Index i = 0; i < rn.size(); ++i) {
    if (std::isnan(rn(i)) || best - rn(i) > kLnrTieTolerance) continue;
    if (out.suspect_meter) {
      out.ambiguous = true;
      break;
    }
    out.suspect_meter = static_cast<std::size_t>(i);
  }
  if (out.suspect_meter) out.statistic = best;
  out.detected = out.statistic > lnr_threshold;
  return out;
}

DetectionResult run_detector(const DetectorConfig& config, const JacobianMatrix& h, const MeasurementVector& z,
                             const WeightMatrix& weights, const EstimationResult& estimate) {
  config.validate();
  switch (config.method) {
    case DetectorMethod::NormThreshold:
      return norm_threshold_test(estimate.residual, *config.tau);
    case DetectorMethod::ChiSquare:
      return chi_square_test(z, z - estimate.residual, weights, static_cast<std::size_t>(h.cols()),
                             config.alpha);
    case DetectorMethod::Lnr:
      return largest_normalized_residual(h, z, weights, estimate, config.lnr_threshold);
  }
  return {};
}

}  // namespace gridse
