/**
 * @file montecarlo.hpp
 * @brief Simulation harness: synthesize noisy measurements, identify
 * repeatedly, and compare empirical parameter-error statistics against the
 * analytic covariance predictions.
 *
 * Determinism contract: per-trial seeds are derived from (master seed, trial
 * index) by a splittable counter-based mix, trials write into index-addressed
 * slots, and aggregation runs in index order with compensated summation, so
 * results are bit-identical for any worker count.
 */

#ifndef PLANCAL_MONTECARLO_HPP_
#define PLANCAL_MONTECARLO_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "plancal/design.hpp"
#include "plancal/identification.hpp"
#include "plancal/kinematics.hpp"

namespace plancal {

/// Zero-mean iid Gaussian measurement noise on both coordinates.
struct NoiseSpec {
  double sigma = 0.0;       ///< mm
  std::uint64_t seed = 0;
};

/// Splittable seed derivation (splitmix64 of master + index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Uniform random plan on [-pi, pi), seeded; handy for design comparisons.
CalibrationPlan random_plan(int n, int m, std::uint64_t seed);

/// Exact forward kinematics of the deviated chain plus per-coordinate noise.
/// Bit-identical output for a fixed spec.
MeasurementSet simulate_measurements(const ManipulatorModel& model,
                                     const ParameterDeviation& true_dev,
                                     const CalibrationPlan& plan,
                                     const NoiseSpec& noise);

/// Per-parameter error statistics over repeated identifications. Parameter
/// order is packed (dtheta_1..dtheta_n, dl_1..dl_n); angles in rad.
struct TrialStatistics {
  Eigen::VectorXd mean_error;
  Eigen::VectorXd empirical_stddev;
  Eigen::VectorXd analytic_stddev;
  long trials = 0;            ///< converged trials that entered the statistics
  long excluded = 0;          ///< non-converged trials, counted and dropped
  bool exclusion_alarm = false;  ///< set when exclusions exceed 0.1%
};

struct TrialOptions {
  int workers = 0;  ///< 0 = hardware concurrency
  IdentifyOptions identify;
};

/**
 * @brief Run `trials` simulate-and-identify rounds and aggregate the errors.
 *
 * Trial t draws its noise from derive_seed(noise.seed, t). Analytic stddevs
 * come from the information-matrix covariance of the plan at the same sigma.
 * Rank deficiency propagates; non-converged trials are excluded and counted.
 */
TrialStatistics run_trials(const ManipulatorModel& model,
                           const ParameterDeviation& true_dev,
                           const CalibrationPlan& plan, const NoiseSpec& noise,
                           long trials, const TrialOptions& opts = {});

/// One entry of a plan comparison, ranked by worst empirical-to-optimal
/// stddev ratio (1.0 would be ideal).
struct PlanComparison {
  std::size_t plan_index = 0;  ///< position in the input list
  PlanScore score;
  TrialStatistics stats;
  double worst_ratio = 0.0;
};

/// Run the same trial batch on every plan (same master seed each) and rank
/// the plans; demonstrates the optimal-vs-random accuracy gap.
std::vector<PlanComparison> compare_plans(
    const ManipulatorModel& model, const ParameterDeviation& true_dev,
    const std::vector<CalibrationPlan>& plans, const NoiseSpec& noise,
    long trials, const TrialOptions& opts = {});

}  // namespace plancal

#endif  // PLANCAL_MONTECARLO_HPP_
