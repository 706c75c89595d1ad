#include <doctest.h>

#include <random>

#include "gridse/attack.hpp"
#include "gridse/bad_data.hpp"
#include "gridse/error.hpp"
#include "gridse/estimator.hpp"
#include "test_support.hpp"

using namespace gridse;
using namespace gridse::testing;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

struct RandomH {
  Eigen::MatrixXd h;
  Eigen::VectorXd sigma;
};

RandomH random_observable_h(std::mt19937_64& gen, std::size_t extra = 1) {
  for (;;) {
    const auto net = random_network(gen);
    const std::size_t m = net.dc_state_dim() + extra + std::uniform_int_distribution<std::size_t>(0, 4)(gen);
    const auto cfg = random_dc_config(gen, net, m);
    if (check_observability(net, cfg).observable) return {dc_jacobian(net, cfg), cfg.sigmas()};
  }
}

}  // namespace

TEST_SUITE("attack") {

TEST_CASE("stealth attacks from fixed state shifts") {
  const auto h = three_bus_h();
  auto a = craft_stealth_attack(h, {vec({0.005, 0.001})}).a;
  CHECK((a - vec({0.02, 0.0125, -0.004})).cwiseAbs().maxCoeff() <= 1e-12);
  a = craft_stealth_attack(h, {vec({0.01, 0.04})}).a;
  CHECK((a - vec({-0.15, 0.025, -0.16})).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(craft_stealth_attack(h, {Eigen::VectorXd::Zero(2)}).a.isZero(0.0));
  try {
    craft_stealth_attack(h, {Eigen::VectorXd::Zero(3)});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("attacked measurement vectors") {
  const auto h = three_bus_h();
  const Eigen::VectorXd z = three_bus_z();
  auto za = apply_attack(z, craft_stealth_attack(h, {vec({0.005, 0.001})}));
  CHECK((za - vec({0.64, 0.0725, 0.366})).cwiseAbs().maxCoeff() <= 1e-12);
  za = apply_attack(z, craft_stealth_attack(h, {vec({0.01, 0.04})}));
  CHECK((za - vec({0.47, 0.085, 0.21})).cwiseAbs().maxCoeff() <= 1e-12);
  try {
    apply_attack(z, {Eigen::VectorXd::Zero(2)});
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LengthMismatch);
  }
}

TEST_CASE("random stealth attacks") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_observable_h(gen);
    const auto seed = static_cast<std::uint64_t>(trial);
    const auto atk = random_stealth_attack(inst.h, 0.05, seed);
    CHECK((atk.attack.a - inst.h * atk.shift.c).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(std::abs(atk.shift.c.norm() - 0.05) <= 1e-12);
    CHECK(verify_stealth(inst.h, atk.attack));

    const auto again = random_stealth_attack(inst.h, 0.05, seed);
    CHECK(again.shift.c == atk.shift.c);
    const auto other = random_stealth_attack(inst.h, 0.05, seed + 1000);
    // A one-dimensional sphere has only two points, so only compare directions in 2+ dimensions.
    if (inst.h.cols() >= 2) CHECK(other.shift.c != atk.shift.c);
  }
  CHECK_THROWS_AS(random_stealth_attack(three_bus_h(), 0.0, 1), Error);
}

TEST_CASE("stealth attacks leave the chi-square statistic unchanged") {
  std::mt19937_64 gen(22);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_observable_h(gen);
    const auto w = WeightMatrix::from_sigmas(inst.sigma);
    Eigen::VectorXd z(inst.h.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = nd(gen) * 0.1;
    const auto atk = random_stealth_attack(inst.h, 0.1, static_cast<std::uint64_t>(trial));
    const Eigen::VectorXd za = apply_attack(z, atk.attack);
    const auto e0 = estimate_dc(inst.h, z, w);
    const auto e1 = estimate_dc(inst.h, za, w);
    const auto dof = static_cast<std::size_t>(inst.h.rows() - inst.h.cols());
    const auto s0 = chi_square_test(z, inst.h * e0.state, w, inst.h.cols(), 0.05);
    const auto s1 = chi_square_test(za, inst.h * e1.state, w, inst.h.cols(), 0.05);
    CHECK(dof >= 1);
    CHECK(std::abs(s0.statistic - s1.statistic) <= 1e-10);
    // The estimate moves by exactly c and the residual does not move.
    CHECK((e1.state - e0.state - atk.shift.c).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((e1.residual - e0.residual).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("constrained attack with meter 2 out of reach") {
  const auto h = three_bus_h();
  const auto atk = constrained_stealth_attack(h, {0, 2});
  REQUIRE(atk);
  CHECK(std::abs(atk->shift.c(0)) <= 1e-12);
  CHECK(std::abs(atk->shift.c(1) - 0.01) <= 1e-12);
  CHECK(std::abs(atk->attack.a(1)) <= 1e-12);
  CHECK((atk->attack.a - vec({-0.05, 0.0, -0.04})).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(verify_stealth(h, atk->attack));

  const auto scaled = constrained_stealth_attack(h, {0, 2}, 0.5);
  REQUIRE(scaled);
  CHECK(std::abs(scaled->shift.c.norm() - 0.5) <= 1e-12);
}

TEST_CASE("constrained attack without enough access") {
  const auto h = three_bus_h();
  CHECK_FALSE(constrained_stealth_attack(h, {0}));
  CHECK_FALSE(constrained_stealth_attack(h, {}));
  const auto all = constrained_stealth_attack(h, {0, 1, 2});
  REQUIRE(all);
  CHECK(all->attack.a.norm() > 0.0);
  CHECK_THROWS_AS(constrained_stealth_attack(h, {3}), Error);
}

TEST_CASE("verify_stealth") {
  const auto h = three_bus_h();
  CHECK(verify_stealth(h, {h * vec({0.3, -0.7})}));
  CHECK(verify_stealth(h, {Eigen::VectorXd::Zero(3)}));
  CHECK_FALSE(verify_stealth(h, {vec({0.01, -0.01, -0.02})}));
  CHECK_FALSE(verify_stealth(h, {vec({0.0, 0.0, 1e-3})}));
}

TEST_CASE("protection of the three-bus meters") {
  const auto h = three_bus_h();
  auto rep = protection_check(h, {1, 2});
  CHECK(rep.is_protected);
  CHECK(rep.residual_attack_dim == 0);
  rep = protection_check(h, {1});
  CHECK_FALSE(rep.is_protected);
  CHECK(rep.residual_attack_dim == 1);
  rep = protection_check(h, {});
  CHECK_FALSE(rep.is_protected);
  CHECK(rep.residual_attack_dim == 2);
}

TEST_CASE("protection agrees with row reduction and is monotone") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_observable_h(gen);
    const auto m = static_cast<std::size_t>(inst.h.rows());
    std::vector<std::size_t> set;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::bernoulli_distribution(0.5)(gen)) set.push_back(i);
    }
    const auto rep = protection_check(inst.h, set);
    const auto rank = row_reduction_rank(select_rows(inst.h, set));
    CHECK(rep.residual_attack_dim == static_cast<std::size_t>(inst.h.cols()) - rank);
    CHECK(rep.is_protected == (rank == static_cast<std::size_t>(inst.h.cols())));
    if (rep.is_protected) {
      // Adding meters never removes protection.
      auto bigger = set;
      for (std::size_t i = 0; i < m; ++i) {
        if (std::find(set.begin(), set.end(), i) == set.end()) bigger.push_back(i);
      }
      CHECK(protection_check(inst.h, bigger).is_protected);
      // With every protected meter out of reach no stealth attack exists.
      std::vector<std::size_t> reachable;
      for (std::size_t i = 0; i < m; ++i) {
        if (std::find(set.begin(), set.end(), i) == set.end()) reachable.push_back(i);
      }
      CHECK_FALSE(constrained_stealth_attack(inst.h, reachable));
    }
  }
}

TEST_CASE("constrained attacks stay off inaccessible meters") {
  std::mt19937_64 gen(24);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_observable_h(gen);
    const auto m = static_cast<std::size_t>(inst.h.rows());
    std::vector<std::size_t> acc;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::bernoulli_distribution(0.6)(gen)) acc.push_back(i);
    }
    const auto atk = constrained_stealth_attack(inst.h, acc);
    std::vector<std::size_t> blocked;
    for (std::size_t i = 0; i < m; ++i) {
      if (std::find(acc.begin(), acc.end(), i) == acc.end()) blocked.push_back(i);
    }
    const auto rank = row_reduction_rank(select_rows(inst.h, blocked));
    CHECK(atk.has_value() == (rank < static_cast<std::size_t>(inst.h.cols())));
    if (!atk) continue;
    for (auto i : blocked) CHECK(std::abs(atk->attack.a(static_cast<Eigen::Index>(i))) <= 1e-12);
    CHECK(verify_stealth(inst.h, atk->attack));
  }
}

}  // TEST_SUITE
