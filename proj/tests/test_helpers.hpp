// Shared fixtures and independent oracles for the test suites.

#ifndef PLANCAL_TESTS_TEST_HELPERS_HPP_
#define PLANCAL_TESTS_TEST_HELPERS_HPP_

#include <random>

#include <Eigen/Dense>

#include "plancal/identification.hpp"
#include "plancal/kinematics.hpp"

namespace plancal::testing {

// Four-link reference arm used across the suites.
inline ManipulatorModel four_link_model() {
  return ManipulatorModel{260.0, 180.0, 120.0, 100.0};
}

inline ParameterDeviation four_link_deviation() {
  Eigen::VectorXd dq(4);
  dq << deg_to_rad(0.5), deg_to_rad(-0.5), deg_to_rad(0.7), deg_to_rad(-0.3);
  Eigen::VectorXd dl(4);
  dl << 1.5, -0.6, -0.4, 0.7;
  return ParameterDeviation(cumulative_from_joint(dq), dl);
}

inline Eigen::VectorXd random_lengths(std::mt19937_64& rng, int n,
                                      double lo = 50.0, double hi = 400.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd lengths(n);
  for (int i = 0; i < n; ++i) lengths(i) = dist(rng);
  return lengths;
}

inline JointConfiguration random_config(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q(i) = angle(rng);
  return JointConfiguration(q);
}

inline CalibrationPlan random_test_plan(std::mt19937_64& rng, int n, int m) {
  std::vector<JointConfiguration> configs;
  configs.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) configs.push_back(random_config(rng, n));
  return CalibrationPlan(std::move(configs));
}

// Deviations drawn from the box |dl| <= max_dl mm, |dtheta| <= max_dtheta rad.
inline ParameterDeviation random_deviation(std::mt19937_64& rng, int n,
                                           double max_dl, double max_dtheta) {
  std::uniform_real_distribution<double> dl_dist(-max_dl, max_dl);
  std::uniform_real_distribution<double> dt_dist(-max_dtheta, max_dtheta);
  Eigen::VectorXd dl(n);
  Eigen::VectorXd dtheta(n);
  for (int i = 0; i < n; ++i) {
    dl(i) = dl_dist(rng);
    dtheta(i) = dt_dist(rng);
  }
  return ParameterDeviation(dtheta, dl);
}

// Central-difference Jacobian of forward_kinematics over the packed
// parameters; the independent check for the analytic Jacobian.
inline Eigen::MatrixXd finite_difference_jacobian(const ManipulatorModel& model,
                                                  const JointConfiguration& config,
                                                  const ParameterDeviation& dev,
                                                  double step = 1e-6) {
  const int n = model.num_links();
  const Eigen::VectorXd packed = dev.packed();
  Eigen::MatrixXd jac(2, 2 * n);
  for (int p = 0; p < 2 * n; ++p) {
    Eigen::VectorXd plus = packed;
    Eigen::VectorXd minus = packed;
    plus(p) += step;
    minus(p) -= step;
    const PlanarPosition fp = forward_kinematics(
        model, config, ParameterDeviation::from_packed(plus));
    const PlanarPosition fm = forward_kinematics(
        model, config, ParameterDeviation::from_packed(minus));
    jac(0, p) = (fp.x - fm.x) / (2.0 * step);
    jac(1, p) = (fp.y - fm.y) / (2.0 * step);
  }
  return jac;
}

// Brute-force information matrix: stack the per-configuration Jacobians and
// sum their Gram matrices.
inline Eigen::MatrixXd brute_force_information(const ManipulatorModel& model,
                                               const CalibrationPlan& plan,
                                               const ParameterDeviation& dev) {
  const int n = model.num_links();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (const JointConfiguration& config : plan.configs) {
    const Eigen::MatrixXd J = jacobian(model, config, dev);
    info += J.transpose() * J;
  }
  return info;
}

}  // namespace plancal::testing

#endif  // PLANCAL_TESTS_TEST_HELPERS_HPP_
