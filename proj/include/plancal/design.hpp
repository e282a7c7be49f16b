/**
 * @file design.hpp
 * @brief Optimal calibration-plan design.
 *
 * A plan is optimal when, for every pair of links j < k, the sums over all
 * experiments of cos and sin of the consecutive joint-angle run
 * q_{j+1} + ... + q_k vanish. Such plans make the information matrix exactly
 * diagonal, diag(m*l_i^2, ..., m, ...), which maximizes its determinant.
 * The module scores arbitrary plans against that target, constructs
 * condition-satisfying plans in closed form from roots of unity, and falls
 * back to a numerical optimizer when joint limits rule the construction out.
 */

#ifndef PLANCAL_DESIGN_HPP_
#define PLANCAL_DESIGN_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plancal/identification.hpp"
#include "plancal/kinematics.hpp"

namespace plancal {

/// One optimality condition: the plan-wide cos/sin sums of the joint-angle
/// run q_first..q_last (2 <= first <= last <= n).
struct ConditionSum {
  int first_joint = 0;
  int last_joint = 0;
  double cos_sum = 0.0;
  double sin_sum = 0.0;

  std::string cos_name() const;  ///< "c2", "c23", "c24", ...
  std::string sin_name() const;
};

/// All pairwise optimality sums of a plan, ordered by (first, last) joint.
/// Empty for n = 1 (a single link has no conditions; every plan is optimal).
std::vector<ConditionSum> condition_residuals(const CalibrationPlan& plan);

/// Largest |cos_sum| or |sin_sum| across the conditions (0 when none).
double max_condition_residual(const std::vector<ConditionSum>& sums);

/**
 * @brief Determinant criteria of a plan.
 *
 * det_c and det_s are the determinants of C' = C/m and S' = S/m. det_d is
 * the determinant of the full information matrix normalized by its optimal
 * diagonal, i.e. of [[C', S'], [S'^T, C']]; it never exceeds 1 and equals 1
 * exactly at condition-satisfying plans.
 */
struct PlanScore {
  double det_c = 0.0;
  double det_s = 0.0;
  double det_d = 0.0;
  double condition_residual = 0.0;
};

PlanScore score_plan(const ManipulatorModel& model, const CalibrationPlan& plan);

/// Score from an m x n matrix of cumulative link angles (used by the
/// optimizer and by perturbation studies of the criterion surface).
PlanScore score_cumulative_angles(const Eigen::MatrixXd& theta);

enum class Q1Policy {
  kSpread,  ///< q_1 spread uniformly over the circle (default)
  kFixed,   ///< q_1 held at a fixed value
};

struct PlanOptions {
  Q1Policy q1_policy = Q1Policy::kSpread;
  double q1_fixed = 0.0;           ///< rad, used with kFixed
  Eigen::VectorXd phase_offsets;   ///< rad, one per joint; empty = all zero
};

/**
 * @brief Closed-form condition-satisfying plan from roots of unity.
 *
 * Sets q_{k,i} = 2*pi*i/m + phase_k for joints k = 2..n and i = 0..m-1, so
 * every consecutive run q_{j+1}+...+q_k walks the circle with frequency
 * k - j in {1, ..., n-1}; with m >= n no frequency is a multiple of m and
 * every condition sum is a complete set of m-th roots of unity, which
 * cancels exactly. q_1 never enters a condition and follows q1_policy.
 *
 * @throws InsufficientPoints when m < n (frequency n-1 would wrap to zero
 * for m = n-1 at best, and identifiability needs m >= n anyway).
 */
CalibrationPlan generate_optimal_plan(const ManipulatorModel& model, int m,
                                      const PlanOptions& opts = {});

/// Per-joint feasible intervals (rad).
struct JointLimits {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct OptimizeOptions {
  int starts = 8;
  int max_iter = 200;
  double target_residual = 1e-10;  ///< stop early once max |sum| drops below
  std::uint64_t seed = 0;
};

struct OptimizedPlan {
  CalibrationPlan plan;
  double residual = 0.0;  ///< max |condition sum| achieved
  PlanScore score;
};

/**
 * @brief Numerical fallback: minimize the sum of squared condition sums over
 * the joint angles by a damped Gauss-Newton descent with analytic
 * derivatives, multi-started from seeded random feasible points and clipped
 * to the joint limits. Best plan wins by lowest residual, then highest
 * det_d, then first found. Deterministic for a fixed seed. A zero residual
 * is not guaranteed: tight limits can make the conditions unsatisfiable, in
 * which case the best local minimum found is returned.
 *
 * @throws InsufficientPoints when m < n; Infeasible when some interval is
 * empty or not finite.
 */
OptimizedPlan optimize_plan_numeric(const ManipulatorModel& model, int m,
                                    const std::optional<JointLimits>& limits,
                                    const OptimizeOptions& opts = {});

}  // namespace plancal

#endif  // PLANCAL_DESIGN_HPP_
