#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gridse/grid_model.hpp"

namespace gridse {

/// Shift of the free DC state that a stealth attack induces in the estimate.
struct StateShift {
  Eigen::VectorXd c;
};

/// Additive corruption of the measurement vector, index-aligned with meters.
struct AttackVector {
  Eigen::VectorXd a;
};

struct StealthAttack {
  StateShift shift;
  AttackVector attack;
};

/// a = H c. Throws DimensionMismatch.
AttackVector craft_stealth_attack(const JacobianMatrix& h, const StateShift& c);

/// c drawn uniformly on the sphere of radius `magnitude`, deterministic in seed.
StealthAttack random_stealth_attack(const JacobianMatrix& h, double magnitude, std::uint64_t seed);

inline constexpr double kDefaultConstrainedMagnitude = 0.01;

/// Stealth attack touching only `accessible_meters` (0-based indices): c
/// spans the null space of the inaccessible rows of H. Returns the
/// least-singular null direction scaled to `magnitude`, or nullopt when
/// only c = 0 satisfies the constraint.
std::optional<StealthAttack> constrained_stealth_attack(const JacobianMatrix& h,
                                                        const std::vector<std::size_t>& accessible_meters,
                                                        double magnitude = kDefaultConstrainedMagnitude);

/// z_a = z + a. Throws LengthMismatch.
MeasurementVector apply_attack(const MeasurementVector& z, const AttackVector& a);

/// True iff a lies in the column space of H (projection residual
/// <= 1e-9 * max(1, ||a||)).
bool verify_stealth(const JacobianMatrix& h, const AttackVector& a);

struct ProtectionReport {
  bool is_protected = false;
  std::size_t residual_attack_dim = 0;
};

/// Whether the protected meters (0-based) pin down every state direction.
ProtectionReport protection_check(const JacobianMatrix& h, const std::vector<std::size_t>& protected_meters);

/// Rows of H at the given indices, in the order given.
Eigen::MatrixXd select_rows(const JacobianMatrix& h, const std::vector<std::size_t>& rows);

}  // namespace gridse
