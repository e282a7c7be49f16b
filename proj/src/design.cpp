#include "plancal/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include <Eigen/Cholesky>

#include "plancal/accuracy.hpp"
#include "plancal/errors.hpp"

namespace plancal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string run_label(char prefix, int first, int last) {
  std::string label(1, prefix);
  label += std::to_string(first);
  if (last != first) {
    if (last > 9 || first > 9) label += '-';
    label += std::to_string(last);
  }
  return label;
}

Eigen::VectorXd resolved_phases(const PlanOptions& opts, int n) {
  if (opts.phase_offsets.size() == 0) return Eigen::VectorXd::Zero(n);
  if (opts.phase_offsets.size() != n) {
    throw DimensionMismatch("phase_offsets has " +
                            std::to_string(opts.phase_offsets.size()) +
                            " entries, expected " + std::to_string(n));
  }
  return opts.phase_offsets;
}

// Optimizer internals: decision variables are the joint angles of columns
// 2..n (q_1 never enters a condition), flattened column-major.
struct ConditionProblem {
  int n = 0;
  int m = 0;
  std::vector<std::pair<int, int>> runs;  // 1-based (first, last) joints

  int num_vars() const { return (n - 1) * m; }
  int num_residuals() const { return 2 * static_cast<int>(runs.size()); }

  // Full m x n joint matrix from the variable vector and the fixed q_1 column.
  Eigen::MatrixXd joint_matrix(const Eigen::VectorXd& q1,
                               const Eigen::VectorXd& x) const {
    Eigen::MatrixXd q(m, n);
    q.col(0) = q1;
    for (int k = 1; k < n; ++k) q.col(k) = x.segment((k - 1) * m, m);
    return q;
  }

  void residuals(const Eigen::MatrixXd& q, Eigen::VectorXd& r,
                 Eigen::MatrixXd* jac) const {
    r.setZero(num_residuals());
    if (jac != nullptr) jac->setZero(num_residuals(), num_vars());
    for (std::size_t p = 0; p < runs.size(); ++p) {
      const auto [first, last] = runs[p];
      const int rc = 2 * static_cast<int>(p);
      const int rs = rc + 1;
      for (int i = 0; i < m; ++i) {
        double alpha = 0.0;
        for (int t = first; t <= last; ++t) alpha += q(i, t - 1);
        const double c = std::cos(alpha);
        const double s = std::sin(alpha);
        r(rc) += c;
        r(rs) += s;
        if (jac != nullptr) {
          for (int t = first; t <= last; ++t) {
            const int col = (t - 2) * m + i;
            (*jac)(rc, col) += -s;
            (*jac)(rs, col) += c;
          }
        }
      }
    }
  }
};

// Damped Gauss-Newton descent on the squared condition sums, clipped to the
// box. Returns the final variable vector.
Eigen::VectorXd descend(const ConditionProblem& problem,
                        const Eigen::VectorXd& q1, Eigen::VectorXd x,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, bool boxed,
                        const OptimizeOptions& opts) {
  const auto clip = [&](Eigen::VectorXd v) {
    if (boxed) v = v.cwiseMax(lower).cwiseMin(upper);
    return v;
  };

  x = clip(std::move(x));
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  problem.residuals(problem.joint_matrix(q1, x), r, nullptr);
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (r.lpNorm<Eigen::Infinity>() < opts.target_residual) break;
    problem.residuals(problem.joint_matrix(q1, x), r, &jac);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;

    bool accepted = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd step = Eigen::LDLT<Eigen::MatrixXd>(damped).solve(-g);
      const Eigen::VectorXd candidate = clip(x + step);
      Eigen::VectorXd r_new;
      problem.residuals(problem.joint_matrix(q1, candidate), r_new, nullptr);
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        x = candidate;
        r = std::move(r_new);
        cost = cost_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (!accepted) break;  // stalled at a local minimum
  }
  return x;
}

}  // namespace

std::string ConditionSum::cos_name() const {
  return run_label('c', first_joint, last_joint);
}

std::string ConditionSum::sin_name() const {
  return run_label('s', first_joint, last_joint);
}

std::vector<ConditionSum> condition_residuals(const CalibrationPlan& plan) {
  const int n = plan.num_joints();
  const int m = plan.num_experiments();
  std::vector<ConditionSum> sums;
  for (int first = 2; first <= n; ++first) {
    for (int last = first; last <= n; ++last) {
      ConditionSum sum;
      sum.first_joint = first;
      sum.last_joint = last;
      for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd& q = plan.configs[static_cast<std::size_t>(i)].q;
        double alpha = 0.0;
        for (int t = first; t <= last; ++t) alpha += q(t - 1);
        sum.cos_sum += std::cos(alpha);
        sum.sin_sum += std::sin(alpha);
      }
      sums.push_back(sum);
    }
  }
  return sums;
}

double max_condition_residual(const std::vector<ConditionSum>& sums) {
  double worst = 0.0;
  for (const ConditionSum& sum : sums) {
    worst = std::max({worst, std::abs(sum.cos_sum), std::abs(sum.sin_sum)});
  }
  return worst;
}

PlanScore score_cumulative_angles(const Eigen::MatrixXd& theta) {
  const int n = static_cast<int>(theta.cols());
  const InformationBlocks blocks =
      information_from_cumulative(Eigen::VectorXd::Ones(n), theta);
  const double m = static_cast<double>(blocks.m);

  const Eigen::MatrixXd c_norm = blocks.C / m;
  const Eigen::MatrixXd s_norm = blocks.S / m;
  Eigen::MatrixXd d_norm(2 * n, 2 * n);
  d_norm.topLeftCorner(n, n) = c_norm;
  d_norm.topRightCorner(n, n) = s_norm;
  d_norm.bottomLeftCorner(n, n) = s_norm.transpose();
  d_norm.bottomRightCorner(n, n) = c_norm;

  PlanScore score;
  score.det_c = c_norm.determinant();
  score.det_s = s_norm.determinant();
  score.det_d = d_norm.determinant();
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      score.condition_residual =
          std::max({score.condition_residual, std::abs(blocks.C(j, k)),
                    std::abs(blocks.S(j, k))});
    }
  }
  return score;
}

PlanScore score_plan(const ManipulatorModel& model,
                     const CalibrationPlan& plan) {
  if (plan.num_joints() != model.num_links()) {
    throw DimensionMismatch(
        "plan has " + std::to_string(plan.num_joints()) +
        " joints but the model has " + std::to_string(model.num_links()) +
        " links");
  }
  Eigen::MatrixXd theta(plan.num_experiments(), plan.num_joints());
  const ParameterDeviation nominal = ParameterDeviation::zero(model.num_links());
  for (int i = 0; i < plan.num_experiments(); ++i) {
    theta.row(i) =
        cumulative_angles(plan.configs[static_cast<std::size_t>(i)], nominal)
            .transpose();
  }
  PlanScore score = score_cumulative_angles(theta);
  score.condition_residual = max_condition_residual(condition_residuals(plan));
  return score;
}

CalibrationPlan generate_optimal_plan(const ManipulatorModel& model, int m,
                                      const PlanOptions& opts) {
  const int n = model.num_links();
  if (m < n) {
    throw InsufficientPoints(
        "a condition-satisfying plan needs m >= n experiments; got m = " +
        std::to_string(m) + " for n = " + std::to_string(n) + " links");
  }
  const Eigen::VectorXd phases = resolved_phases(opts, n);

  Eigen::MatrixXd q(m, n);
  for (int i = 0; i < m; ++i) {
    const double spread = kTwoPi * static_cast<double>(i) / m;
    q(i, 0) =
        (opts.q1_policy == Q1Policy::kSpread ? spread : opts.q1_fixed) +
        phases(0);
    for (int k = 1; k < n; ++k) q(i, k) = spread + phases(k);
  }
  return CalibrationPlan::from_matrix(q);
}

OptimizedPlan optimize_plan_numeric(const ManipulatorModel& model, int m,
                                    const std::optional<JointLimits>& limits,
                                    const OptimizeOptions& opts) {
  const int n = model.num_links();
  if (m < n) {
    throw InsufficientPoints(
        "a calibration plan needs m >= n experiments; got m = " +
        std::to_string(m) + " for n = " + std::to_string(n) + " links");
  }
  if (limits) {
    if (limits->lower.size() != n || limits->upper.size() != n) {
      throw DimensionMismatch("joint limits must list all " +
                              std::to_string(n) + " joints");
    }
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(limits->lower(j)) || !std::isfinite(limits->upper(j)) ||
          limits->lower(j) > limits->upper(j)) {
        throw Infeasible("joint " + std::to_string(j + 1) +
                         " has an empty or non-finite limit interval");
      }
    }
  }

  // q_1 does not appear in any condition; spread it over its feasible range.
  Eigen::VectorXd q1(m);
  for (int i = 0; i < m; ++i) {
    if (limits) {
      const double width = limits->upper(0) - limits->lower(0);
      q1(i) = limits->lower(0) + (i + 0.5) * width / m;
    } else {
      q1(i) = kTwoPi * static_cast<double>(i) / m;
    }
  }

  if (n == 1) {
    OptimizedPlan best;
    best.plan = CalibrationPlan::from_matrix(q1);
    best.residual = 0.0;
    best.score = score_plan(model, best.plan);
    return best;
  }

  ConditionProblem problem;
  problem.n = n;
  problem.m = m;
  for (int first = 2; first <= n; ++first) {
    for (int last = first; last <= n; ++last) {
      problem.runs.emplace_back(first, last);
    }
  }

  Eigen::VectorXd lower(problem.num_vars());
  Eigen::VectorXd upper(problem.num_vars());
  for (int k = 1; k < n; ++k) {
    const double lo = limits ? limits->lower(k) : -std::numbers::pi;
    const double hi = limits ? limits->upper(k) : std::numbers::pi;
    lower.segment((k - 1) * m, m).setConstant(lo);
    upper.segment((k - 1) * m, m).setConstant(hi);
  }
  const bool boxed = limits.has_value();

  // Start 0 warm-starts from the closed-form construction (clipped when
  // boxed); the remaining starts are seeded uniform draws from the box.
  std::mt19937_64 rng(opts.seed);
  std::vector<Eigen::VectorXd> starts;
  {
    const Eigen::MatrixXd q0 = generate_optimal_plan(model, m).as_matrix();
    Eigen::VectorXd x0(problem.num_vars());
    for (int k = 1; k < n; ++k) x0.segment((k - 1) * m, m) = q0.col(k);
    starts.push_back(std::move(x0));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 1; s < std::max(1, opts.starts); ++s) {
    Eigen::VectorXd x(problem.num_vars());
    for (int v = 0; v < problem.num_vars(); ++v) {
      x(v) = lower(v) + (upper(v) - lower(v)) * unit(rng);
    }
    starts.push_back(std::move(x));
  }

  OptimizedPlan best;
  double best_residual = std::numeric_limits<double>::infinity();
  double best_det_d = -std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& start : starts) {
    const Eigen::VectorXd x =
        descend(problem, q1, start, lower, upper, boxed, opts);
    CalibrationPlan plan =
        CalibrationPlan::from_matrix(problem.joint_matrix(q1, x));
    const PlanScore score = score_plan(model, plan);
    const double residual = score.condition_residual;
    if (residual < best_residual ||
        (residual == best_residual && score.det_d > best_det_d)) {
      best_residual = residual;
      best_det_d = score.det_d;
      best.plan = std::move(plan);
      best.residual = residual;
      best.score = score;
    }
  }
  return best;
}

}  // namespace plancal
