#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gridse/estimator.hpp"
#include "gridse/grid_model.hpp"

namespace gridse {

enum class DetectorMethod { NormThreshold, ChiSquare, Lnr };

std::string_view to_string(DetectorMethod method);
std::optional<DetectorMethod> parse_detector_method(std::string_view name);

/// Only the field belonging to `method` is consulted.
struct DetectorConfig {
  DetectorMethod method = DetectorMethod::ChiSquare;
  std::optional<double> tau;   // norm_threshold, no default
  double alpha = 0.05;         // chi_square
  double lnr_threshold = 3.0;  // lnr

  /// Throws InvalidInput when the method's parameter is missing or out of range.
  void validate() const;
};

struct DetectionResult {
  bool detected = false;
  double statistic = 0.0;
  double threshold_used = 0.0;
  std::optional<std::size_t> suspect_meter;  // 0-based, lnr only
  bool ambiguous = false;
  std::vector<std::size_t> critical_meters;  // 0-based, lnr only
};

/// r = z - h(x')
Eigen::VectorXd residual(const MeasurementVector& z, const MeasurementVector& h_of_x);

/// Detected when ||r||_2 > tau.
DetectionResult norm_threshold_test(const Eigen::VectorXd& r, double tau);

/// Upper-alpha quantile of the chi-square distribution.
double chi_square_quantile(double dof, double alpha);

/// Weighted objective against the chi-square quantile with m - state_dim
/// degrees of freedom. Throws NoRedundancy when m <= state_dim.
DetectionResult chi_square_test(const MeasurementVector& z, const MeasurementVector& h_of_x,
                                const WeightMatrix& weights, std::size_t state_dim, double alpha);

/// Residual sensitivity S = I - H (H^T W H)^-1 H^T W.
Eigen::MatrixXd residual_sensitivity(const JacobianMatrix& h, const WeightMatrix& weights);

/// Normalized residuals |r_i| / sqrt(Omega_ii) with Omega = S R. Critical
/// meters (S_ii <= kCriticalSensitivity) get NaN.
Eigen::VectorXd normalized_residuals(const JacobianMatrix& h, const WeightMatrix& weights,
                                     const Eigen::VectorXd& r);

inline constexpr double kCriticalSensitivity = 1e-10;
inline constexpr double kLnrTieTolerance = 1e-9;

/// Largest normalized residual test on `estimate.residual`. Critical
/// meters are excluded from the argmax and listed in the result.
DetectionResult largest_normalized_residual(const JacobianMatrix& h, const MeasurementVector& z,
                                            const WeightMatrix& weights, const EstimationResult& estimate,
                                            double lnr_threshold);

/// Runs the configured test. `h` is the Jacobian at the estimate.
DetectionResult run_detector(const DetectorConfig& config, const JacobianMatrix& h, const MeasurementVector& z,
                             const WeightMatrix& weights, const EstimationResult& estimate);

}  // namespace gridse
