#include "gridse/attack.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "gridse/error.hpp"
#include "gridse/linalg.hpp"

namespace gridse {

namespace {

void check_meter_indices(const JacobianMatrix& h, const std::vector<std::size_t>& meters) {
  for (auto i : meters) {
    if (i >= static_cast<std::size_t>(h.rows())) {
      throw Error(ErrorKind::InvalidInput, "meter index " + std::to_string(i + 1) + " out of range");
    }
  }
}

}  // namespace

Eigen::MatrixXd select_rows(const JacobianMatrix& h, const std::vector<std::size_t>& rows) {
  check_meter_indices(h, rows);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), h.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = h.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

AttackVector craft_stealth_attack(const JacobianMatrix& h, const StateShift& c) {
  if (c.c.size() != h.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "shift has " + std::to_string(c.c.size()) + " entries, H has " +
                                                  std::to_string(h.cols()) + " columns");
  }
  return {h * c.c};
}

StealthAttack random_stealth_attack(const JacobianMatrix& h, double magnitude, std::uint64_t seed) {
  if (!(magnitude > 0.0)) throw Error(ErrorKind::InvalidInput, "attack magnitude must be positive");
  if (h.cols() == 0) throw Error(ErrorKind::DimensionMismatch, "H has no columns");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd c(h.cols());
  do {
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(gen);
  } while (c.norm() == 0.0);
  c *= magnitude / c.norm();
  StateShift shift{c};
  return {shift, craft_stealth_attack(h, shift)};
}

std::optional<StealthAttack> constrained_stealth_attack(const JacobianMatrix& h,
                                                        const std::vector<std::size_t>& accessible_meters,
                                                        double magnitude) {
  check_meter_indices(h, accessible_meters);
  if (!(magnitude > 0.0)) throw Error(ErrorKind::InvalidInput, "attack magnitude must be positive");
  std::vector<std::size_t> inaccessible;
  for (std::size_t i = 0; i < static_cast<std::size_t>(h.rows()); ++i) {
    if (std::find(accessible_meters.begin(), accessible_meters.end(), i) == accessible_meters.end()) {
      inaccessible.push_back(i);
    }
  }
  const Eigen::MatrixXd basis = null_space(select_rows(h, inaccessible));
  if (basis.cols() == 0) return std::nullopt;

  Eigen::VectorXd c = basis.col(basis.cols() - 1);
  // Fix the sign so the largest component is positive.
  Eigen::Index lead = 0;
  c.cwiseAbs().maxCoeff(&lead);
  if (c(lead) < 0.0) c = -c;
  c *= magnitude / c.norm();

  StateShift shift{c};
  AttackVector attack = craft_stealth_attack(h, shift);
  return StealthAttack{shift, attack};
}

MeasurementVector apply_attack(const MeasurementVector& z, const AttackVector& a) {
  if (z.size() != a.a.size()) {
    throw Error(ErrorKind::LengthMismatch, "z has " + std::to_string(z.size()) + " entries, attack has " +
                                               std::to_string(a.a.size()));
  }
  return z + a.a;
}

bool verify_stealth(const JacobianMatrix& h, const AttackVector& a) {
  if (a.a.size() != h.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "attack length vs Jacobian rows");
  }
  const double scale = std::max(1.0, a.a.norm());
  if (h.cols() == 0) return a.a.norm() <= 1e-9 * scale;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(h);
  cod.setThreshold(kRankTolerance);
  const Eigen::VectorXd c = cod.solve(a.a);
  return (a.a - h * c).norm() <= 1e-9 * scale;
}

ProtectionReport protection_check(const JacobianMatrix& h, const std::vector<std::size_t>& protected_meters) {
  const auto rank = numerical_rank(select_rows(h, protected_meters));
  const auto dim = static_cast<std::size_t>(h.cols());
  return {rank == dim, dim - rank};
}

}  // namespace gridse
