/**
 * @file accuracy.hpp
 * @brief Error propagation for the identified parameters: the block-structured
 * information matrix, the covariance it induces, and the closed-form accuracy
 * of condition-satisfying plans.
 */

#ifndef PLANCAL_ACCURACY_HPP_
#define PLANCAL_ACCURACY_HPP_

#include <Eigen/Dense>

#include "plancal/identification.hpp"
#include "plancal/kinematics.hpp"

namespace plancal {

/**
 * @brief Block decomposition of the information matrix sum_i J_i^T J_i.
 *
 * With L = diag(link lengths) and the per-pair trigonometric sums
 *   c_jk = sum_i cos(theta_k^(i) - theta_j^(i))
 *   s_jk = sum_i sin(theta_k^(i) - theta_j^(i))
 * the assembled 2n x 2n matrix is [[L*C*L, L*S], [(L*S)^T, C]], which equals
 * the brute-force Jacobian stack sum entry for entry. C is symmetric with
 * diagonal m; S is antisymmetric with zero diagonal; |c_jk|, |s_jk| <= m.
 */
struct InformationBlocks {
  Eigen::VectorXd lengths;  ///< diagonal of L (mm)
  Eigen::MatrixXd C;
  Eigen::MatrixXd S;
  int m = 0;

  int n() const { return static_cast<int>(lengths.size()); }
  Eigen::MatrixXd assembled() const;
};

/// Blocks from an m x n matrix of cumulative link angles (one row per
/// experiment). This is the shared kernel for plan scoring and accuracy.
InformationBlocks information_from_cumulative(const Eigen::VectorXd& lengths,
                                              const Eigen::MatrixXd& theta);

/// Information matrix of a plan at nominal parameters (zero deviation).
InformationBlocks information_matrix(const ManipulatorModel& model,
                                     const CalibrationPlan& plan);

/// Information matrix re-evaluated at a parameter estimate (corrected lengths
/// and angles).
InformationBlocks information_matrix_at(const ManipulatorModel& model,
                                        const CalibrationPlan& plan,
                                        const ParameterDeviation& dev);

/// Parameter standard deviations and full covariance. sigma_q is in radians;
/// conversion to degrees happens only in report formatting.
struct AccuracyReport {
  Eigen::VectorXd sigma_q;      ///< stddev of each dtheta_i (rad)
  Eigen::VectorXd sigma_l;      ///< stddev of each dl_i (mm)
  Eigen::MatrixXd covariance;   ///< 2n x 2n, (dtheta | dl) order, mixed units
};

/**
 * @brief Covariance of the identified parameters under iid measurement noise
 * of standard deviation sigma (mm): sigma^2 * (sum_i J_i^T J_i)^{-1}.
 *
 * @throws SingularInformation when the smallest eigenvalue of the information
 * matrix is below 1e-10 times the largest.
 */
AccuracyReport covariance(const ManipulatorModel& model,
                          const CalibrationPlan& plan, double sigma);

/// Same, with the information matrix evaluated at a parameter estimate.
AccuracyReport covariance_at(const ManipulatorModel& model,
                             const CalibrationPlan& plan, double sigma,
                             const ParameterDeviation& dev);

/**
 * @brief Closed-form accuracy of a condition-satisfying plan of size m:
 *   sigma_q_i = sigma / (sqrt(m) * l_i),  sigma_l_i = sigma / sqrt(m),
 * with the matching diagonal covariance. No plan is constructed.
 */
AccuracyReport analytic_optimal_stddev(const ManipulatorModel& model, int m,
                                       double sigma);

}  // namespace plancal

#endif  // PLANCAL_ACCURACY_HPP_
