#include <doctest.h>

#include <cmath>

#include "kinocbs/dynamics.hpp"
#include "test_util.hpp"

using namespace kinocbs;
namespace dyn = kinocbs::dynamics;

namespace {
State vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}
}  // namespace

TEST_CASE("step: unicycle straight line along x") {
  const auto type = RobotType::from_tag(RobotTypeTag::Unicycle1);
  const State next = dyn::step(type, vec({0, 0, 0}), vec({1.0, 0.0}), 0.1);
  CHECK(next(0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(next(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next(2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("step: double integrator Euler update at the acceleration bound") {
  const auto type = RobotType::from_tag(RobotTypeTag::DoubleIntegrator2D);
  const State next = dyn::step(type, vec({0, 0, 0.5, 0}), vec({2.0, 0.0}), 0.1);
  CHECK(next(0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(next(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(next(2) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(next(3) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("step: car with trailer matches a hand-evaluated Euler step") {
  const auto type = RobotType::from_tag(RobotTypeTag::CarWithTrailer);
  const double v = 0.5, phi = 0.3, dt = 0.1;
  const State next = dyn::step(type, vec({0, 0, 0, 0}), vec({v, phi}), dt);
  // independent evaluation of the chosen kinematics
  const double ex = 0.0 + v * std::cos(0.0) * dt;
  const double ey = 0.0 + v * std::sin(0.0) * dt;
  const double eth0 = 0.0 + v * std::tan(phi) / 0.4 * dt;
  const double eth1 = 0.0 + v / 0.5 * std::sin(0.0 - 0.0) * dt;
  CHECK(next(0) == doctest::Approx(ex).epsilon(1e-15));
  CHECK(next(1) == doctest::Approx(ey).epsilon(1e-15));
  CHECK(next(2) == doctest::Approx(eth0).epsilon(1e-15));
  CHECK(next(3) == doctest::Approx(eth1).epsilon(1e-15));
}

TEST_CASE("step: dimension mismatch is a contract violation") {
  const auto type = RobotType::from_tag(RobotTypeTag::Unicycle1);
  CHECK_THROWS_AS(dyn::step(type, vec({0, 0}), vec({0, 0}), 0.1),
                  ContractError);
  CHECK_THROWS_AS(dyn::step(type, vec({0, 0, 0}), vec({0}), 0.1),
                  ContractError);
}

TEST_CASE("jacobians: double integrator is the expected linear system") {
  const auto type = RobotType::from_tag(RobotTypeTag::DoubleIntegrator2D);
  Eigen::MatrixXd A, B;
  dyn::jacobians(type, vec({0.3, -0.2, 0.1, 0.4}), vec({1.0, -1.0}), 0.1, A, B);
  Eigen::MatrixXd A_exp = Eigen::MatrixXd::Identity(4, 4);
  A_exp(0, 2) = 0.1;
  A_exp(1, 3) = 0.1;
  Eigen::MatrixXd B_exp = Eigen::MatrixXd::Zero(4, 2);
  B_exp(2, 0) = 0.1;
  B_exp(3, 1) = 0.1;
  CHECK((A - A_exp).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((B - B_exp).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("jacobians: unicycle at a fixed point matches central differences") {
  const auto type = RobotType::from_tag(RobotTypeTag::Unicycle1);
  Eigen::MatrixXd A, B, A_fd, B_fd;
  const State x = vec({0, 0, 0});
  const Action u = vec({1.0, 0.0});
  dyn::jacobians(type, x, u, 0.1, A, B);
  testutil::fd_jacobians(type, x, u, 0.1, A_fd, B_fd);
  CHECK((A - A_fd).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((B - B_fd).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("jacobians: all types agree with finite differences over random pairs") {
  for (const auto& type : all_robot_types()) {
    Rng rng(0xA11CE + static_cast<int>(type.tag));
    for (double dt : {0.05, 0.1}) {
      for (int trial = 0; trial < 100; ++trial) {
        const State x = testutil::random_state(type, rng);
        const Action u = testutil::random_action(type, rng);
        Eigen::MatrixXd A, B, A_fd, B_fd;
        dyn::jacobians(type, x, u, dt, A, B);
        testutil::fd_jacobians(type, x, u, dt, A_fd, B_fd);
        REQUIRE((A - A_fd).cwiseAbs().maxCoeff() <= 1e-5);
        REQUIRE((B - B_fd).cwiseAbs().maxCoeff() <= 1e-5);
      }
    }
  }
}

TEST_CASE("distance: identity, wrap symmetry, single axis") {
  const auto type = RobotType::from_tag(RobotTypeTag::Unicycle1);
  MetricWeights unit;
  unit.w = Eigen::VectorXd::Ones(3);
  const State a = vec({0, 0, M_PI - 0.01});
  const State b = vec({0, 0, -M_PI + 0.01});
  CHECK(dyn::distance(type, a, a, unit) == doctest::Approx(0.0));
  CHECK(dyn::distance(type, a, b, unit) == doctest::Approx(0.02).epsilon(1e-9));
  MetricWeights w;
  w.w = vec({1.0, 1.0, 0.5});
  CHECK(dyn::distance(type, vec({1, 0, 0}), vec({0, 0, 0}), w) ==
        doctest::Approx(1.0));
}

TEST_CASE("distance: metric axioms on random triples") {
  for (const auto& type : all_robot_types()) {
    Rng rng(7 + static_cast<int>(type.tag));
    const auto w = dyn::default_metric_weights(type);
    for (int trial = 0; trial < 10000; ++trial) {
      const State a = testutil::random_state(type, rng);
      const State b = testutil::random_state(type, rng);
      const State c = testutil::random_state(type, rng);
      const double ab = dyn::distance(type, a, b, w);
      const double ba = dyn::distance(type, b, a, w);
      const double ac = dyn::distance(type, a, c, w);
      const double bc = dyn::distance(type, b, c, w);
      REQUIRE(ab >= 0.0);
      REQUIRE(ab == doctest::Approx(ba).epsilon(1e-12));
      REQUIRE(ac <= ab + bc + 1e-12);
    }
  }
}

TEST_CASE("step: translation equivariance in position") {
  for (const auto& type : all_robot_types()) {
    Rng rng(99 + static_cast<int>(type.tag));
    for (int trial = 0; trial < 200; ++trial) {
      const State x = testutil::random_state(type, rng);
      const Action u = testutil::random_action(type, rng);
      const Eigen::Vector2d t(rng.uniform(-5, 5), rng.uniform(-5, 5));
      State xt = x;
      xt.head<2>() += t;
      State lhs = dyn::step(type, xt, u, 0.1);
      State rhs = dyn::step(type, x, u, 0.1);
      rhs.head<2>() += t;
      REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("step: output angles stay in (-pi, pi]") {
  for (const auto& type : all_robot_types()) {
    Rng rng(5 + static_cast<int>(type.tag));
    for (int trial = 0; trial < 500; ++trial) {
      State x = testutil::random_state(type, rng);
      const Action u = testutil::random_action(type, rng);
      // push headings close to the boundary to exercise the wrap
      for (int d : dyn::angle_dims(type)) x(d) = M_PI - rng.uniform(0, 0.02);
      const State next = dyn::step(type, x, u, 0.1);
      for (int d : dyn::angle_dims(type)) {
        REQUIRE(next(d) > -M_PI);
        REQUIRE(next(d) <= M_PI);
      }
    }
  }
}

TEST_CASE("sample_state: degenerate extent, bounds, determinism") {
  const auto type = RobotType::from_tag(RobotTypeTag::Unicycle2);
  const auto bounds = dyn::default_bounds(type);
  {
    Rng rng(3);
    const State s = dyn::sample_state(type, rng, bounds,
                                      Eigen::Vector2d(1.5, 2.5),
                                      Eigen::Vector2d(1.5, 2.5));
    CHECK(s(0) == doctest::Approx(1.5));
    CHECK(s(1) == doctest::Approx(2.5));
  }
  {
    Rng rng(4);
    for (int i = 0; i < 10000; ++i) {
      const State s = dyn::sample_state(type, rng, bounds,
                                        Eigen::Vector2d(-1, -1),
                                        Eigen::Vector2d(1, 1));
      REQUIRE(s(0) >= -1.0);
      REQUIRE(s(0) <= 1.0);
      REQUIRE(s(3) >= bounds.state_lo(3));
      REQUIRE(s(3) <= bounds.state_hi(3));
      REQUIRE(s(2) > -M_PI);
      REQUIRE(s(2) <= M_PI);
    }
  }
  {
    Rng r1(42), r2(42);
    for (int i = 0; i < 100; ++i) {
      const State a = dyn::sample_state(type, r1, bounds,
                                        Eigen::Vector2d(-1, -1),
                                        Eigen::Vector2d(1, 1));
      const State b = dyn::sample_state(type, r2, bounds,
                                        Eigen::Vector2d(-1, -1),
                                        Eigen::Vector2d(1, 1));
      REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}
