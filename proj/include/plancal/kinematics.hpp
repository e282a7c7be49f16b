/**
 * @file kinematics.hpp
 * @brief Geometric model of an n-link planar manipulator.
 *
 * The chain is parameterized by nominal link lengths l_i (mm) and joint
 * angles q_i (rad). Geometric deviations are expressed in cumulative-angle
 * space: the identified quantities are the length deviations dl_i and the
 * cumulative angular deviations dtheta_i (dtheta_i is the sum of the
 * joint-space deviations dq_1..dq_i). All angles are plain radians with no
 * wrapping; degrees appear only at I/O boundaries.
 */

#ifndef PLANCAL_KINEMATICS_HPP_
#define PLANCAL_KINEMATICS_HPP_

#include <Eigen/Dense>
#include <numbers>

namespace plancal {

inline constexpr double deg_to_rad(double deg) {
  return deg * (std::numbers::pi / 180.0);
}

inline constexpr double rad_to_deg(double rad) {
  return rad * (180.0 / std::numbers::pi);
}

/// Nominal geometry of a planar serial chain: n positive link lengths (mm).
class ManipulatorModel {
 public:
  explicit ManipulatorModel(Eigen::VectorXd link_lengths);
  ManipulatorModel(std::initializer_list<double> link_lengths);

  int num_links() const { return static_cast<int>(link_lengths_.size()); }
  const Eigen::VectorXd& link_lengths() const { return link_lengths_; }

 private:
  Eigen::VectorXd link_lengths_;
};

/// The 2n deviation parameters: cumulative angular deviations dtheta (rad)
/// and length deviations dl (mm). Packed order is (dtheta_1..dtheta_n,
/// dl_1..dl_n), matching the Jacobian column layout.
struct ParameterDeviation {
  Eigen::VectorXd dtheta;
  Eigen::VectorXd dl;

  ParameterDeviation() = default;
  ParameterDeviation(Eigen::VectorXd dtheta_in, Eigen::VectorXd dl_in);

  static ParameterDeviation zero(int n);
  static ParameterDeviation from_packed(const Eigen::VectorXd& packed);

  int size() const { return static_cast<int>(dtheta.size()); }
  Eigen::VectorXd packed() const;
};

/// One manipulator posture: n joint angles (rad).
struct JointConfiguration {
  Eigen::VectorXd q;

  JointConfiguration() = default;
  explicit JointConfiguration(Eigen::VectorXd q_in) : q(std::move(q_in)) {}

  int size() const { return static_cast<int>(q.size()); }
};

/// End-effector position in the plane (mm).
struct PlanarPosition {
  double x = 0.0;
  double y = 0.0;
};

/// Cumulative link orientations theta_i = sum_{j<=i} q_j + dtheta_i.
Eigen::VectorXd cumulative_angles(const JointConfiguration& config,
                                  const ParameterDeviation& dev);

/// End-effector position of the deviated chain:
///   x = sum_i (l_i + dl_i) cos(theta_i),  y = sum_i (l_i + dl_i) sin(theta_i).
PlanarPosition forward_kinematics(const ManipulatorModel& model,
                                  const JointConfiguration& config,
                                  const ParameterDeviation& dev);

/**
 * @brief 2 x 2n Jacobian of the end-effector position with respect to the
 * deviation parameters, evaluated at the supplied deviation.
 *
 * Column order is (dtheta_1..dtheta_n | dl_1..dl_n):
 *   row x: [-(l_i+dl_i) sin(theta_i) ... | cos(theta_i) ...]
 *   row y: [ (l_i+dl_i) cos(theta_i) ... | sin(theta_i) ...]
 */
Eigen::MatrixXd jacobian(const ManipulatorModel& model,
                         const JointConfiguration& config,
                         const ParameterDeviation& dev);

/// Element-wise sum of two deviations (accumulates iterative corrections).
ParameterDeviation apply_deviation(const ParameterDeviation& acc,
                                   const ParameterDeviation& step);

/// Joint-space deviations from cumulative ones: dq_i = dtheta_i - dtheta_{i-1}.
Eigen::VectorXd joint_from_cumulative(const Eigen::VectorXd& dtheta);

/// Cumulative deviations from joint-space ones (prefix sums).
Eigen::VectorXd cumulative_from_joint(const Eigen::VectorXd& dq);

}  // namespace plancal

#endif  // PLANCAL_KINEMATICS_HPP_
