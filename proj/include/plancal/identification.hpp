/**
 * @file identification.hpp
 * @brief Iterative linearized least-squares identification of geometric
 * parameter deviations from end-effector measurements.
 */

#ifndef PLANCAL_IDENTIFICATION_HPP_
#define PLANCAL_IDENTIFICATION_HPP_

#include <vector>

#include <Eigen/Dense>

#include "plancal/kinematics.hpp"

namespace plancal {

/// The m joint configurations used for calibration experiments.
struct CalibrationPlan {
  std::vector<JointConfiguration> configs;

  CalibrationPlan() = default;
  explicit CalibrationPlan(std::vector<JointConfiguration> configs_in);

  int num_experiments() const { return static_cast<int>(configs.size()); }
  int num_joints() const {
    return configs.empty() ? 0 : configs.front().size();
  }

  /// m x n matrix of joint angles, one row per configuration.
  Eigen::MatrixXd as_matrix() const;
  static CalibrationPlan from_matrix(const Eigen::MatrixXd& q);
};

/// Measured end-effector positions, index-aligned with the plan.
struct MeasurementSet {
  std::vector<PlanarPosition> positions;

  int size() const { return static_cast<int>(positions.size()); }
};

struct IdentifyOptions {
  double tol = 1e-10;  // stop when the combined step norm (rad, mm) drops below
  int max_iter = 100;
};

struct IdentificationResult {
  ParameterDeviation deviation;
  int iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
  /// Residual norm before any correction, then after each iteration.
  std::vector<double> residual_history;
};

/// Stacked measurement residuals (x_i - f_x, y_i - f_y) for all experiments,
/// evaluated at the given deviation estimate. Length 2m.
Eigen::VectorXd residual_vector(const ManipulatorModel& model,
                                const ParameterDeviation& dev,
                                const CalibrationPlan& plan,
                                const MeasurementSet& measurements);

/// 2m x 2n stack of per-configuration Jacobians at the given deviation.
Eigen::MatrixXd stacked_jacobian(const ManipulatorModel& model,
                                 const ParameterDeviation& dev,
                                 const CalibrationPlan& plan);

/**
 * @brief One linearized least-squares step.
 *
 * Solves the stacked system J_a * step = residual in the least-squares sense
 * through an SVD of J_a (never the explicit normal-equations inverse).
 *
 * @throws RankDeficient when J_a has fewer rows than columns or its smallest
 * singular value is below 1e-8 times the largest (unidentifiable plan).
 */
ParameterDeviation solve_linearized(const ManipulatorModel& model,
                                    const ParameterDeviation& dev,
                                    const CalibrationPlan& plan,
                                    const MeasurementSet& measurements);

/**
 * @brief Full iterative identification (Gauss-Newton).
 *
 * Starts from zero deviation and repeats solve_linearized + apply_deviation,
 * re-evaluating the model at the corrected estimate each iteration, until the
 * step norm drops below opts.tol or opts.max_iter is reached. Non-convergence
 * is reported through the converged flag, not an error.
 */
IdentificationResult identify(const ManipulatorModel& model,
                              const CalibrationPlan& plan,
                              const MeasurementSet& measurements,
                              const IdentifyOptions& opts = {});

}  // namespace plancal

#endif  // PLANCAL_IDENTIFICATION_HPP_
