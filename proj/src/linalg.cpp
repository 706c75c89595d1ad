#include "gridse/linalg.hpp"

#include <cmath>

#include "gridse/error.hpp"

namespace gridse {

std::size_t numerical_rank(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& a, double rel_tol) {
  const Eigen::Index k = a.cols();
  if (a.rows() == 0) return Eigen::MatrixXd::Identity(k, k);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > rel_tol * s(0)) ++rank;
    }
  }
  return svd.matrixV().rightCols(k - rank);
}

Eigen::LDLT<Eigen::MatrixXd> factor_gain(const Eigen::MatrixXd& gain) {
  if (gain.rows() == 0) {
    throw Error(ErrorKind::UnobservableNetwork, "empty state vector");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gain, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();  // ascending
  const double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (!std::isfinite(hi) || hi <= 0.0 || lo <= 0.0 || hi / lo > kMaxGainCondition) {
    throw Error(ErrorKind::UnobservableNetwork, "gain matrix is singular or ill-conditioned");
  }
  return Eigen::LDLT<Eigen::MatrixXd>(gain);
}

}  // namespace gridse
