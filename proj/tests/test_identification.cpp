#include <cmath>
#include <random>

#include <doctest.h>

#include "plancal/design.hpp"
#include "plancal/errors.hpp"
#include "plancal/identification.hpp"
#include "plancal/kinematics.hpp"
#include "test_helpers.hpp"

using namespace plancal;
using plancal::testing::four_link_deviation;
using plancal::testing::four_link_model;
using plancal::testing::random_deviation;
using plancal::testing::random_lengths;
using plancal::testing::random_test_plan;

namespace {

MeasurementSet exact_measurements(const ManipulatorModel& model,
                                  const CalibrationPlan& plan,
                                  const ParameterDeviation& dev) {
  MeasurementSet measurements;
  for (const JointConfiguration& config : plan.configs) {
    measurements.positions.push_back(forward_kinematics(model, config, dev));
  }
  return measurements;
}

// Objective value computed from scratch, independent of residual_vector.
double objective_root(const ManipulatorModel& model,
                      const ParameterDeviation& dev, const CalibrationPlan& plan,
                      const MeasurementSet& measurements) {
  double sum = 0.0;
  for (int i = 0; i < plan.num_experiments(); ++i) {
    const PlanarPosition p = forward_kinematics(
        model, plan.configs[static_cast<std::size_t>(i)], dev);
    const PlanarPosition& z = measurements.positions[static_cast<std::size_t>(i)];
    sum += (z.x - p.x) * (z.x - p.x) + (z.y - p.y) * (z.y - p.y);
  }
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("residual vector") {
  const ManipulatorModel model = four_link_model();
  const ParameterDeviation truth = four_link_deviation();
  const CalibrationPlan plan = generate_optimal_plan(model, 6);
  const MeasurementSet measurements = exact_measurements(model, plan, truth);

  SUBCASE("vanishes at the true deviation") {
    CHECK(residual_vector(model, truth, plan, measurements).norm() < 1e-12);
  }
  SUBCASE("norm equals the direct objective evaluation") {
    const ParameterDeviation zero = ParameterDeviation::zero(4);
    const double norm = residual_vector(model, zero, plan, measurements).norm();
    const double expected = objective_root(model, zero, plan, measurements);
    CHECK(norm == doctest::Approx(expected).epsilon(1e-12));
    CHECK(norm > 1.0);  // the deviations move the end effector by millimetres
  }
  SUBCASE("single offset measurement") {
    const ManipulatorModel two_link{260.0, 180.0};
    CalibrationPlan single = CalibrationPlan::from_matrix(
        Eigen::RowVector2d(0.3, -0.8));
    MeasurementSet offset =
        exact_measurements(two_link, single, ParameterDeviation::zero(2));
    offset.positions[0].x += 1.0;
    const Eigen::VectorXd r = residual_vector(
        two_link, ParameterDeviation::zero(2), single, offset);
    CHECK(r(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r(1) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch") {
    MeasurementSet short_set = measurements;
    short_set.positions.pop_back();
    CHECK_THROWS_AS(residual_vector(model, truth, plan, short_set),
                    DimensionMismatch);
  }
}

TEST_CASE("linearized solve") {
  const ManipulatorModel model{260.0, 180.0};
  const CalibrationPlan plan = generate_optimal_plan(model, 4);

  SUBCASE("recovers a tiny deviation in one shot") {
    const ParameterDeviation truth(Eigen::Vector2d(1e-5, -6e-6),
                                   Eigen::Vector2d(0.01, -0.008));
    const MeasurementSet measurements = exact_measurements(model, plan, truth);
    const ParameterDeviation step = solve_linearized(
        model, ParameterDeviation::zero(2), plan, measurements);
    const Eigen::VectorXd got = step.packed();
    const Eigen::VectorXd want = truth.packed();
    for (Eigen::Index i = 0; i < want.size(); ++i) {
      CHECK(std::abs(got(i) - want(i)) <= 1e-4 * std::abs(want(i)));
    }
  }
  SUBCASE("zero right-hand side gives a zero step") {
    const MeasurementSet measurements =
        exact_measurements(model, plan, ParameterDeviation::zero(2));
    const ParameterDeviation step = solve_linearized(
        model, ParameterDeviation::zero(2), plan, measurements);
    CHECK(step.packed().norm() < 1e-14);
  }
  SUBCASE("too few experiments") {
    const ManipulatorModel three{260.0, 180.0, 120.0};
    std::mt19937_64 rng(3);
    const CalibrationPlan small = random_test_plan(rng, 3, 2);
    const MeasurementSet measurements =
        exact_measurements(three, small, ParameterDeviation::zero(3));
    CHECK_THROWS_AS(solve_linearized(three, ParameterDeviation::zero(3), small,
                                     measurements),
                    RankDeficient);
  }
  SUBCASE("identical configurations") {
    Eigen::MatrixXd q(4, 2);
    q << 0.4, 0.9, 0.4, 0.9, 0.4, 0.9, 0.4, 0.9;
    const CalibrationPlan degenerate = CalibrationPlan::from_matrix(q);
    const MeasurementSet measurements =
        exact_measurements(model, degenerate, ParameterDeviation::zero(2));
    CHECK_THROWS_AS(solve_linearized(model, ParameterDeviation::zero(2),
                                     degenerate, measurements),
                    RankDeficient);
  }
}

TEST_CASE("identify recovers the reference four-link deviations exactly") {
  const ManipulatorModel model = four_link_model();
  const ParameterDeviation truth = four_link_deviation();
  const CalibrationPlan plan = generate_optimal_plan(model, 5);
  const MeasurementSet measurements = exact_measurements(model, plan, truth);

  const IdentificationResult result = identify(model, plan, measurements);
  CHECK(result.converged);
  CHECK((result.deviation.dl - truth.dl).lpNorm<Eigen::Infinity>() < 1e-9);
  const Eigen::VectorXd dq_got = joint_from_cumulative(result.deviation.dtheta);
  const Eigen::VectorXd dq_want = joint_from_cumulative(truth.dtheta);
  for (Eigen::Index i = 0; i < dq_want.size(); ++i) {
    CHECK(std::abs(rad_to_deg(dq_got(i)) - rad_to_deg(dq_want(i))) < 1e-9);
  }
}

TEST_CASE("identify on an already nominal arm stops immediately") {
  const ManipulatorModel model{260.0, 180.0};
  const CalibrationPlan plan = generate_optimal_plan(model, 3);
  const MeasurementSet measurements =
      exact_measurements(model, plan, ParameterDeviation::zero(2));
  const IdentificationResult result = identify(model, plan, measurements);
  CHECK(result.converged);
  CHECK(result.iterations == 1);
  CHECK(result.deviation.packed().norm() < 1e-13);
  CHECK(result.final_residual_norm < 1e-12);
}

TEST_CASE("two-link identification on the three-point plan") {
  const ManipulatorModel model{260.0, 180.0};
  Eigen::VectorXd dq(2);
  dq << deg_to_rad(0.5), deg_to_rad(-0.5);
  const ParameterDeviation truth(cumulative_from_joint(dq),
                                 Eigen::Vector2d(1.5, -0.6));
  const CalibrationPlan plan = generate_optimal_plan(model, 3);
  const MeasurementSet measurements = exact_measurements(model, plan, truth);

  const IdentificationResult result = identify(model, plan, measurements);
  CHECK(result.converged);
  CHECK(result.iterations <= 4);  // measured regression bound for this fixture
  CHECK((result.deviation.packed() - truth.packed()).lpNorm<Eigen::Infinity>() <
        1e-10);
}

TEST_CASE("noiseless identification is exact over random instances") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int m = n + 2;
    const ManipulatorModel model{random_lengths(rng, n)};
    const CalibrationPlan plan = random_test_plan(rng, n, m);
    const ParameterDeviation truth =
        random_deviation(rng, n, 5.0, deg_to_rad(2.0));
    const MeasurementSet measurements = exact_measurements(model, plan, truth);

    const IdentificationResult result = identify(model, plan, measurements);
    CHECK(result.converged);
    CHECK((result.deviation.packed() - truth.packed()).lpNorm<Eigen::Infinity>() <
          1e-9);

    // The residual norm never grows from one correction to the next.
    for (std::size_t k = 1; k < result.residual_history.size(); ++k) {
      CHECK(result.residual_history[k] <=
            result.residual_history[k - 1] + 1e-10);
    }
  }
}

TEST_CASE("converged solutions are stationary points of the objective") {
  const ManipulatorModel model = four_link_model();
  const CalibrationPlan plan = generate_optimal_plan(model, 6);
  const ParameterDeviation truth = four_link_deviation();
  const MeasurementSet measurements = exact_measurements(model, plan, truth);
  const IdentificationResult result = identify(model, plan, measurements);
  REQUIRE(result.converged);

  const auto objective = [&](const Eigen::VectorXd& packed) {
    const Eigen::VectorXd r = residual_vector(
        model, ParameterDeviation::from_packed(packed), plan, measurements);
    return r.squaredNorm();
  };
  const Eigen::VectorXd at = result.deviation.packed();
  const double h = 1e-7;
  for (Eigen::Index p = 0; p < at.size(); ++p) {
    Eigen::VectorXd plus = at;
    Eigen::VectorXd minus = at;
    plus(p) += h;
    minus(p) -= h;
    const double slope = (objective(plus) - objective(minus)) / (2.0 * h);
    CHECK(std::abs(slope) < 1e-6);
  }
}
