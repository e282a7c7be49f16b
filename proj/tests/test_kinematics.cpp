#include <cmath>
#include <complex>
#include <random>

#include <doctest.h>

#include "plancal/errors.hpp"
#include "plancal/kinematics.hpp"
#include "test_helpers.hpp"

using namespace plancal;
using plancal::testing::random_config;
using plancal::testing::random_deviation;
using plancal::testing::random_lengths;

namespace {

// Independent position oracle: sum of link vectors as complex exponentials.
PlanarPosition complex_sum_position(const ManipulatorModel& model,
                                    const JointConfiguration& config,
                                    const ParameterDeviation& dev) {
  std::complex<double> p(0.0, 0.0);
  double angle = 0.0;
  for (int i = 0; i < model.num_links(); ++i) {
    angle += config.q(i);
    p += (model.link_lengths()(i) + dev.dl(i)) *
         std::exp(std::complex<double>(0.0, angle + dev.dtheta(i)));
  }
  return PlanarPosition{p.real(), p.imag()};
}

}  // namespace

TEST_CASE("model construction validates lengths") {
  CHECK_THROWS_AS(ManipulatorModel{Eigen::VectorXd()}, DimensionMismatch);
  Eigen::VectorXd bad(2);
  bad << 100.0, -5.0;
  CHECK_THROWS_AS(ManipulatorModel{bad}, Error);
  CHECK(ManipulatorModel({260.0, 180.0}).num_links() == 2);
}

TEST_CASE("cumulative angles are prefix sums plus deviations") {
  SUBCASE("zero case") {
    JointConfiguration q(Eigen::Vector2d(0.0, 0.0));
    const Eigen::VectorXd theta = cumulative_angles(q, ParameterDeviation::zero(2));
    CHECK(theta(0) == 0.0);
    CHECK(theta(1) == 0.0);
  }
  SUBCASE("telescoping sum") {
    JointConfiguration q(
        Eigen::Vector2d(std::numbers::pi / 2, -std::numbers::pi / 2));
    const Eigen::VectorXd theta = cumulative_angles(q, ParameterDeviation::zero(2));
    CHECK(theta(0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
    CHECK(theta(1) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("hand prefix-sum") {
    JointConfiguration q(Eigen::Vector3d(0.1, 0.2, 0.3));
    const ParameterDeviation dev(Eigen::Vector3d(0.01, 0.02, 0.03),
                                 Eigen::Vector3d::Zero());
    const Eigen::VectorXd theta = cumulative_angles(q, dev);
    CHECK(theta(0) == doctest::Approx(0.11).epsilon(1e-15));
    CHECK(theta(1) == doctest::Approx(0.32).epsilon(1e-15));
    CHECK(theta(2) == doctest::Approx(0.63).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch") {
    JointConfiguration q(Eigen::Vector3d(0.1, 0.2, 0.3));
    CHECK_THROWS_AS(cumulative_angles(q, ParameterDeviation::zero(2)),
                    DimensionMismatch);
  }
}

TEST_CASE("forward kinematics matches the closed geometry") {
  const ManipulatorModel two_link{260.0, 180.0};
  SUBCASE("fully extended along x") {
    const PlanarPosition p = forward_kinematics(
        two_link, JointConfiguration(Eigen::Vector2d(0.0, 0.0)),
        ParameterDeviation::zero(2));
    CHECK(p.x == doctest::Approx(440.0).epsilon(1e-15));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("rotated by 90 degrees") {
    const PlanarPosition p = forward_kinematics(
        two_link, JointConfiguration(Eigen::Vector2d(std::numbers::pi / 2, 0.0)),
        ParameterDeviation::zero(2));
    CHECK(std::abs(p.x) < 1e-12);
    CHECK(p.y == doctest::Approx(440.0).epsilon(1e-14));
  }
  SUBCASE("complex-exponential oracle, four links") {
    const ManipulatorModel model = plancal::testing::four_link_model();
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const JointConfiguration q = random_config(rng, 4);
      const ParameterDeviation dev =
          random_deviation(rng, 4, 5.0, deg_to_rad(2.0));
      const PlanarPosition p = forward_kinematics(model, q, dev);
      const PlanarPosition expected = complex_sum_position(model, q, dev);
      CHECK(std::abs(p.x - expected.x) < 1e-12);
      CHECK(std::abs(p.y - expected.y) < 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(
        forward_kinematics(two_link, JointConfiguration(Eigen::Vector3d::Zero()),
                           ParameterDeviation::zero(3)),
        DimensionMismatch);
  }
}

TEST_CASE("workspace bound holds for random inputs") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const ManipulatorModel model{random_lengths(rng, n)};
    const ParameterDeviation dev = random_deviation(rng, n, 5.0, deg_to_rad(2.0));
    const PlanarPosition p =
        forward_kinematics(model, random_config(rng, n), dev);
    const double reach = (model.link_lengths() + dev.dl).sum();
    CHECK(std::hypot(p.x, p.y) <= reach + 1e-9);
  }
}

TEST_CASE("rotating the base joint rotates the end effector") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const ManipulatorModel model{random_lengths(rng, n)};
    const ParameterDeviation dev = random_deviation(rng, n, 5.0, deg_to_rad(2.0));
    const JointConfiguration q = random_config(rng, n);
    std::uniform_real_distribution<double> delta_dist(-1.5, 1.5);
    const double delta = delta_dist(rng);

    JointConfiguration rotated = q;
    rotated.q(0) += delta;
    const PlanarPosition base = forward_kinematics(model, q, dev);
    const PlanarPosition moved = forward_kinematics(model, rotated, dev);
    const double c = std::cos(delta);
    const double s = std::sin(delta);
    CHECK(std::abs(moved.x - (c * base.x - s * base.y)) < 1e-12);
    CHECK(std::abs(moved.y - (s * base.x + c * base.y)) < 1e-12);
  }
}

TEST_CASE("jacobian matches hand values for one link") {
  const ManipulatorModel model{260.0};
  SUBCASE("theta = 0") {
    const Eigen::MatrixXd J = jacobian(
        model, JointConfiguration(Eigen::VectorXd::Zero(1)),
        ParameterDeviation::zero(1));
    CHECK(J(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(J(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(J(1, 0) == doctest::Approx(260.0).epsilon(1e-15));
    CHECK(J(1, 1) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("theta = pi/2") {
    Eigen::VectorXd q(1);
    q << std::numbers::pi / 2;
    const Eigen::MatrixXd J =
        jacobian(model, JointConfiguration(q), ParameterDeviation::zero(1));
    CHECK(J(0, 0) == doctest::Approx(-260.0).epsilon(1e-14));
    CHECK(std::abs(J(0, 1)) < 1e-14);
    CHECK(std::abs(J(1, 0)) < 1e-10);
    CHECK(J(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("jacobian agrees with central finite differences") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const ManipulatorModel model{random_lengths(rng, n, 50.0, 500.0)};
    const JointConfiguration q = random_config(rng, n);
    const ParameterDeviation dev = random_deviation(rng, n, 5.0, deg_to_rad(2.0));
    const Eigen::MatrixXd J = jacobian(model, q, dev);
    const Eigen::MatrixXd fd =
        plancal::testing::finite_difference_jacobian(model, q, dev);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2 * n; ++c) {
        const double scale = std::max({1.0, std::abs(J(r, c)), std::abs(fd(r, c))});
        CHECK(std::abs(J(r, c) - fd(r, c)) <= 1e-5 * scale);
      }
    }
  }
}

TEST_CASE("linearization error is second order") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const ManipulatorModel model{random_lengths(rng, n)};
    const JointConfiguration q = random_config(rng, n);
    const ParameterDeviation zero = ParameterDeviation::zero(n);
    const PlanarPosition p0 = forward_kinematics(model, q, zero);
    const Eigen::MatrixXd J = jacobian(model, q, zero);

    // A fixed direction, scaled down by half; the residual must quarter.
    const ParameterDeviation direction =
        random_deviation(rng, n, 0.5, deg_to_rad(0.6));
    const auto residual_norm = [&](double scale) {
      Eigen::VectorXd step = scale * direction.packed();
      const PlanarPosition p = forward_kinematics(
          model, q, ParameterDeviation::from_packed(step));
      const Eigen::Vector2d linear =
          Eigen::Vector2d(p0.x, p0.y) + J * step;
      return (Eigen::Vector2d(p.x, p.y) - linear).norm();
    };

    const double full = residual_norm(1.0);
    const double half = residual_norm(0.5);
    if (full > 1e-8) {  // keep the ratio far from the rounding floor
      CHECK(full / half >= 3.5);
      CHECK(full / half <= 4.5);
    }
  }
}

TEST_CASE("apply_deviation accumulates element-wise") {
  const ParameterDeviation d(Eigen::Vector2d(0.01, 0.02),
                             Eigen::Vector2d(1.5, -0.6));
  SUBCASE("identity") {
    const ParameterDeviation sum = apply_deviation(ParameterDeviation::zero(2), d);
    CHECK(sum.dtheta == d.dtheta);
    CHECK(sum.dl == d.dl);
  }
  SUBCASE("inverse") {
    const ParameterDeviation neg(-d.dtheta, -d.dl);
    const ParameterDeviation sum = apply_deviation(d, neg);
    CHECK(sum.packed().norm() == 0.0);
  }
  SUBCASE("element-wise sum") {
    const ParameterDeviation step(Eigen::Vector2d(0.001, 0.001),
                                  Eigen::Vector2d(0.1, 0.1));
    const ParameterDeviation sum = apply_deviation(d, step);
    CHECK(sum.dl(0) == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(sum.dl(1) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(sum.dtheta(0) == doctest::Approx(0.011).epsilon(1e-15));
    CHECK(sum.dtheta(1) == doctest::Approx(0.021).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(apply_deviation(d, ParameterDeviation::zero(3)),
                    DimensionMismatch);
  }
}

TEST_CASE("joint and cumulative deviations convert both ways") {
  Eigen::VectorXd dq(4);
  dq << 0.5, -0.5, 0.7, -0.3;
  const Eigen::VectorXd dtheta = cumulative_from_joint(dq);
  CHECK(dtheta(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dtheta(1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dtheta(2) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(dtheta(3) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK((joint_from_cumulative(dtheta) - dq).lpNorm<Eigen::Infinity>() < 1e-15);
}
