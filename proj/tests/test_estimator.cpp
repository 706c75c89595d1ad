#include <doctest.h>

#include <random>

#include "gridse/error.hpp"
#include "gridse/estimator.hpp"
#include "test_support.hpp"

using namespace gridse;
using namespace gridse::testing;

namespace {

WeightMatrix uniform_weights(Eigen::Index m, double sigma) {
  return WeightMatrix::from_sigmas(Eigen::VectorXd::Constant(m, sigma));
}

/// Random observable DC instance: network, H, weights and a noisy z.
struct DcInstance {
  Eigen::MatrixXd h;
  WeightMatrix w{Eigen::VectorXd::Ones(1)};
  Eigen::VectorXd z;
};

DcInstance random_dc_instance(std::mt19937_64& gen) {
  for (;;) {
    const auto net = random_network(gen);
    const std::size_t m = net.dc_state_dim() + 1 + std::uniform_int_distribution<std::size_t>(0, 6)(gen);
    const auto cfg = random_dc_config(gen, net, m);
    if (!check_observability(net, cfg).observable) continue;
    DcInstance inst;
    inst.h = dc_jacobian(net, cfg);
    inst.w = WeightMatrix::from_config(cfg);
    std::normal_distribution<double> noise;
    Eigen::VectorXd x(inst.h.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 0.1 * noise(gen);
    inst.z = inst.h * x;
    for (Eigen::Index i = 0; i < inst.z.size(); ++i) inst.z(i) += noise(gen) / std::sqrt(inst.w.diagonal(i));
    return inst;
  }
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("three-bus base case") {
  const auto est = estimate_dc(three_bus_h(), three_bus_z(), uniform_weights(3, 0.01));
  CHECK(std::abs(est.state(0) - 0.0286) < 5e-5);
  CHECK(std::abs(est.state(1) - -0.0943) < 5e-5);
  CHECK(std::abs(est.squared_error_raw - 0.00021429) < 5e-9);
  CHECK(std::abs(est.residual(0) - 0.0057) < 5e-5);
  CHECK(std::abs(est.residual(1) - -0.0114) < 5e-5);
  CHECK(std::abs(est.residual(2) - -0.0071) < 5e-5);
  CHECK(est.converged);
  CHECK(est.iterations == 1);
  CHECK(est.objective_weighted == doctest::Approx(est.squared_error_raw / 1e-4));
}

TEST_CASE("arbitrarily corrupted measurements") {
  Eigen::VectorXd z(3);
  z << 0.63, 0.05, 0.35;
  const auto est = estimate_dc(three_bus_h(), z, uniform_weights(3, 0.01));
  CHECK(std::abs(est.state(0) - 0.0313) < 5e-5);
  CHECK(std::abs(est.state(1) - -0.0919) < 5e-5);
  CHECK(std::abs(est.squared_error_raw - 0.0013) < 5e-5);
}

TEST_CASE("exact data is recovered exactly") {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_dc_instance(gen);
    const Eigen::VectorXd x = Eigen::VectorXd::Random(inst.h.cols()) * 0.1;
    const auto est = estimate_dc(inst.h, inst.h * x, inst.w);
    CHECK((est.state - x).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(est.residual.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("rank-deficient H is unobservable") {
  Eigen::MatrixXd h(1, 2);
  h << 2.5, 0.0;
  Eigen::VectorXd z(1);
  z << 0.06;
  try {
    estimate_dc(h, z, uniform_weights(1, 0.01));
    FAIL("expected UnobservableNetwork");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnobservableNetwork);
  }
  CHECK_THROWS_AS(estimate_dc(three_bus_h(), Eigen::VectorXd::Zero(2), uniform_weights(3, 0.01)), Error);
}

TEST_CASE("weighted objective") {
  Eigen::VectorXd r(3);
  r << 0.0057142857142857, -0.0114285714285714, -0.0071428571428571;
  const Eigen::VectorXd z = three_bus_z();
  CHECK(weighted_objective(z, z - r, uniform_weights(3, 0.01)) == doctest::Approx(0.00021429 / 0.0001).epsilon(1e-4));
  CHECK(weighted_objective(z, z, uniform_weights(3, 0.01)) == 0.0);
  CHECK(weighted_objective(z, z - r, uniform_weights(3, 1.0)) == doctest::Approx(r.squaredNorm()));
  try {
    weighted_objective(z, Eigen::VectorXd::Zero(2), uniform_weights(3, 1.0));
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LengthMismatch);
  }
}

TEST_CASE("weights must be positive and finite") {
  CHECK_THROWS_AS(WeightMatrix(Eigen::Vector2d(1.0, 0.0)), Error);
  CHECK_THROWS_AS(WeightMatrix(Eigen::Vector2d(1.0, -2.0)), Error);
  CHECK_THROWS_AS(WeightMatrix::from_sigmas(Eigen::Vector2d(0.01, 0.0)), Error);
}

TEST_CASE("normal-equation optimality and local minimality") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_dc_instance(gen);
    const auto est = estimate_dc(inst.h, inst.z, inst.w);
    const Eigen::VectorXd grad = inst.h.transpose() * inst.w.diagonal.asDiagonal() * est.residual;
    const double scale = (inst.h.cwiseAbs().transpose() * inst.w.diagonal.asDiagonal() * inst.z.cwiseAbs()).maxCoeff();
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, scale));

    std::normal_distribution<double> nd;
    for (int p = 0; p < 100; ++p) {
      Eigen::VectorXd dx(est.state.size());
      for (Eigen::Index i = 0; i < dx.size(); ++i) dx(i) = nd(gen);
      dx *= 1e-3 / dx.norm();
      const double perturbed = weighted_objective(inst.z, inst.h * (est.state + dx), inst.w);
      CHECK(perturbed >= est.objective_weighted);
    }
  }
}

TEST_CASE("common weight scale cancels") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = random_dc_instance(gen);
    const auto a = estimate_dc(inst.h, inst.z, inst.w);
    const auto b = estimate_dc(inst.h, inst.z, WeightMatrix(inst.w.diagonal * 37.5));
    CHECK((a.state - b.state).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("AC estimator recovers a noiselessly measured state") {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_network(gen, {2, 6, true, 0.4});
    const auto y = build_admittance(net);
    const auto cfg = full_ac_config(net);
    const auto truth = random_ac_state(gen, net, 0.95, 1.05, 0.1);
    const auto z = h_eval_ac(net, y, truth, cfg);
    const auto est = estimate_ac(net, y, z, cfg, AcOptions{}, WeightMatrix::from_config(cfg));
    REQUIRE(est.converged);
    CHECK((est.state - free_vector(net, truth)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("AC estimate with pinned magnitudes stays close to DC") {
  const auto c = load_case(data_dir() / "cases" / "three_bus_ac.json");
  const auto y = build_admittance(c.network);
  const auto est = estimate_ac(c.network, y, *c.z, c.config, AcOptions{}, WeightMatrix::from_config(c.config));
  REQUIRE(est.converged);
  const auto dc = estimate_dc(three_bus_h(), three_bus_z(), uniform_weights(3, 0.01));
  CHECK(std::abs(est.state(0) - dc.state(0)) <= 0.02 * std::abs(dc.state(0)));
  CHECK(std::abs(est.state(1) - dc.state(1)) <= 0.02 * std::abs(dc.state(1)));
}

TEST_CASE("zero iteration budget returns the initial state unconverged") {
  const auto c = load_case(data_dir() / "cases" / "three_bus_ac.json");
  const auto y = build_admittance(c.network);
  AcOptions opt;
  opt.max_iter = 0;
  const auto est = estimate_ac(c.network, y, *c.z, c.config, opt, WeightMatrix::from_config(c.config));
  CHECK_FALSE(est.converged);
  CHECK(est.iterations == 0);
  CHECK(est.state == free_vector(c.network, StateVector::flat(c.network, true)));
  try {
    require_converged(est);
    FAIL("expected DidNotConverge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DidNotConverge);
    CHECK(exit_code(e.kind()) == 4);
  }
}

TEST_CASE("converged Gauss-Newton iterate is a fixed point") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = random_network(gen, {3, 6, true, 0.4});
    const auto y = build_admittance(net);
    const auto cfg = full_ac_config(net);
    const auto w = WeightMatrix::from_config(cfg);
    const auto truth = random_ac_state(gen, net, 0.95, 1.05, 0.1);
    Eigen::VectorXd z = h_eval_ac(net, y, truth, cfg);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += meter_noise(99, static_cast<std::size_t>(i), 0.01);
    AcOptions opt;
    const auto est = estimate_ac(net, y, z, cfg, opt, w);
    REQUIRE(est.converged);
    opt.init = state_from_free(net, est.state, Mode::Ac);
    opt.max_iter = 1;
    const auto again = estimate_ac(net, y, z, cfg, opt, w);
    CHECK((again.state - est.state).cwiseAbs().maxCoeff() < opt.tol);
  }
}

TEST_CASE("AC estimation without enough meters is unobservable") {
  const auto c = three_bus_case();
  const auto y = build_admittance(c.network);
  MeasurementConfig v_only;
  for (const auto& b : c.network.buses()) v_only.specs.push_back({MeasurementKind::VoltageMagnitude, b.id, 0, 0, 0.01});
  try {
    estimate_ac(c.network, y, Eigen::VectorXd::Ones(3), v_only, AcOptions{}, WeightMatrix::from_config(v_only));
    FAIL("expected UnobservableNetwork");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnobservableNetwork);
    CHECK(exit_code(e.kind()) == 3);
  }
}

}  // TEST_SUITE
