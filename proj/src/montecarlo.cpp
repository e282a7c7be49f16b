#include "plancal/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "plancal/accuracy.hpp"
#include "plancal/errors.hpp"

namespace plancal {

namespace {

// Kahan-compensated sum over a range accessed in index order.
template <typename Get>
double compensated_sum(long count, Get&& get) {
  double sum = 0.0;
  double carry = 0.0;
  for (long i = 0; i < count; ++i) {
    const double y = get(i) - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

int resolve_workers(int requested, long trials) {
  int workers = requested > 0
                    ? requested
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  return static_cast<int>(
      std::min<long>(workers, std::max<long>(1, trials)));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CalibrationPlan random_plan(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  Eigen::MatrixXd q(m, n);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index k = 0; k < q.cols(); ++k) q(i, k) = angle(rng);
  }
  return CalibrationPlan::from_matrix(q);
}

MeasurementSet simulate_measurements(const ManipulatorModel& model,
                                     const ParameterDeviation& true_dev,
                                     const CalibrationPlan& plan,
                                     const NoiseSpec& noise) {
  if (noise.sigma < 0.0) {
    throw Error("noise sigma must be nonnegative, got " +
                std::to_string(noise.sigma));
  }
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  MeasurementSet measurements;
  measurements.positions.reserve(plan.configs.size());
  for (const JointConfiguration& config : plan.configs) {
    PlanarPosition p = forward_kinematics(model, config, true_dev);
    if (noise.sigma > 0.0) {
      p.x += noise.sigma * gauss(rng);
      p.y += noise.sigma * gauss(rng);
    }
    measurements.positions.push_back(p);
  }
  return measurements;
}

TrialStatistics run_trials(const ManipulatorModel& model,
                           const ParameterDeviation& true_dev,
                           const CalibrationPlan& plan, const NoiseSpec& noise,
                           long trials, const TrialOptions& opts) {
  if (trials < 1) {
    throw Error("trial count must be >= 1, got " + std::to_string(trials));
  }
  const int n = model.num_links();
  const Eigen::VectorXd truth = true_dev.packed();
  if (truth.size() != 2 * n) {
    throw DimensionMismatch("true deviation has " +
                            std::to_string(true_dev.size()) +
                            " parameters per kind, model has " +
                            std::to_string(n) + " links");
  }

  // Each slot is filled by exactly one trial; aggregation afterwards runs in
  // index order regardless of how many workers filled the slots.
  Eigen::MatrixXd errors(2 * n, trials);
  std::vector<std::uint8_t> converged_flags(static_cast<std::size_t>(trials), 0);

  const int workers = resolve_workers(opts.workers, trials);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto run_range = [&](long begin, long end) {
    try {
      for (long t = begin; t < end; ++t) {
        NoiseSpec trial_noise;
        trial_noise.sigma = noise.sigma;
        trial_noise.seed = derive_seed(noise.seed, static_cast<std::uint64_t>(t));
        const MeasurementSet measurements =
            simulate_measurements(model, true_dev, plan, trial_noise);
        const IdentificationResult result =
            identify(model, plan, measurements, opts.identify);
        if (result.converged) {
          converged_flags[static_cast<std::size_t>(t)] = 1;
          errors.col(t) = result.deviation.packed() - truth;
        }
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (workers == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long begin = w * chunk;
      const long end = std::min(trials, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (std::thread& worker : pool) worker.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<long> kept;
  kept.reserve(static_cast<std::size_t>(trials));
  for (long t = 0; t < trials; ++t) {
    if (converged_flags[static_cast<std::size_t>(t)]) kept.push_back(t);
  }
  const long used = static_cast<long>(kept.size());
  if (used == 0) {
    throw Error("no trial converged; cannot aggregate statistics");
  }

  TrialStatistics stats;
  stats.trials = used;
  stats.excluded = trials - used;
  stats.exclusion_alarm =
      static_cast<double>(stats.excluded) > 0.001 * static_cast<double>(trials);
  stats.mean_error.resize(2 * n);
  stats.empirical_stddev.resize(2 * n);
  for (int p = 0; p < 2 * n; ++p) {
    const double mean =
        compensated_sum(used, [&](long i) { return errors(p, kept[i]); }) /
        static_cast<double>(used);
    stats.mean_error(p) = mean;
    if (used > 1) {
      const double ss = compensated_sum(used, [&](long i) {
        const double d = errors(p, kept[i]) - mean;
        return d * d;
      });
      stats.empirical_stddev(p) = std::sqrt(ss / static_cast<double>(used - 1));
    } else {
      stats.empirical_stddev(p) = 0.0;
    }
  }

  const AccuracyReport analytic = covariance(model, plan, noise.sigma);
  stats.analytic_stddev.resize(2 * n);
  stats.analytic_stddev << analytic.sigma_q, analytic.sigma_l;
  return stats;
}

std::vector<PlanComparison> compare_plans(
    const ManipulatorModel& model, const ParameterDeviation& true_dev,
    const std::vector<CalibrationPlan>& plans, const NoiseSpec& noise,
    long trials, const TrialOptions& opts) {
  if (plans.empty()) {
    throw Error("compare_plans: at least one plan required");
  }

  std::vector<PlanComparison> results;
  results.reserve(plans.size());
  for (std::size_t p = 0; p < plans.size(); ++p) {
    PlanComparison entry;
    entry.plan_index = p;
    entry.score = score_plan(model, plans[p]);
    entry.stats = run_trials(model, true_dev, plans[p], noise, trials, opts);

    const AccuracyReport bound = analytic_optimal_stddev(
        model, plans[p].num_experiments(), noise.sigma);
    Eigen::VectorXd optimal(2 * model.num_links());
    optimal << bound.sigma_q, bound.sigma_l;
    entry.worst_ratio = 0.0;
    for (Eigen::Index i = 0; i < optimal.size(); ++i) {
      if (optimal(i) > 0.0) {
        entry.worst_ratio = std::max(
            entry.worst_ratio, entry.stats.empirical_stddev(i) / optimal(i));
      }
    }
    results.push_back(std::move(entry));
  }

  std::stable_sort(results.begin(), results.end(),
                   [](const PlanComparison& a, const PlanComparison& b) {
                     return a.worst_ratio < b.worst_ratio;
                   });
  return results;
}

}  // namespace plancal
