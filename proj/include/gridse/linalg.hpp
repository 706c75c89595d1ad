#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace gridse {

/// Singular values below this fraction of the largest count as zero.
inline constexpr double kRankTolerance = 1e-9;

/// Gain matrices with a larger 2-norm condition number are treated as singular.
inline constexpr double kMaxGainCondition = 1e12;

std::size_t numerical_rank(const Eigen::MatrixXd& a, double rel_tol = kRankTolerance);

/// Orthonormal null-space basis of `a`, one vector per column, ordered by
/// decreasing singular value so the last column is the least-singular
/// direction. A matrix with no rows has the identity as its basis.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double rel_tol = kRankTolerance);

/// Factors a symmetric positive definite gain matrix. Throws
/// UnobservableNetwork when it is singular or its condition number
/// exceeds kMaxGainCondition.
Eigen::LDLT<Eigen::MatrixXd> factor_gain(const Eigen::MatrixXd& gain);

}  // namespace gridse
