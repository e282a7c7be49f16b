#include "plancal/identification.hpp"

#include <string>
#include <utility>

#include <Eigen/SVD>

#include "plancal/errors.hpp"

namespace plancal {

namespace {

// Relative singular-value cutoff below which a stacked Jacobian is treated
// as rank deficient.
constexpr double kRankTolerance = 1e-8;

void require_aligned(const ManipulatorModel& model, const CalibrationPlan& plan,
                     const MeasurementSet* measurements) {
  if (plan.num_experiments() < 1) {
    throw DimensionMismatch("calibration plan is empty");
  }
  if (plan.num_joints() != model.num_links()) {
    throw DimensionMismatch(
        "plan has " + std::to_string(plan.num_joints()) +
        " joints but the model has " + std::to_string(model.num_links()) +
        " links");
  }
  if (measurements != nullptr &&
      measurements->size() != plan.num_experiments()) {
    throw DimensionMismatch(
        "plan has " + std::to_string(plan.num_experiments()) +
        " configurations but " + std::to_string(measurements->size()) +
        " measurements were given");
  }
}

}  // namespace

CalibrationPlan::CalibrationPlan(std::vector<JointConfiguration> configs_in)
    : configs(std::move(configs_in)) {
  if (configs.empty()) {
    throw DimensionMismatch("CalibrationPlan: at least one configuration "
                            "required");
  }
  const int n = configs.front().size();
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (configs[i].size() != n) {
      throw DimensionMismatch("CalibrationPlan: configuration " +
                              std::to_string(i + 1) + " has " +
                              std::to_string(configs[i].size()) +
                              " joints, expected " + std::to_string(n));
    }
  }
}

Eigen::MatrixXd CalibrationPlan::as_matrix() const {
  Eigen::MatrixXd q(num_experiments(), num_joints());
  for (int i = 0; i < num_experiments(); ++i) {
    q.row(i) = configs[static_cast<std::size_t>(i)].q.transpose();
  }
  return q;
}

CalibrationPlan CalibrationPlan::from_matrix(const Eigen::MatrixXd& q) {
  std::vector<JointConfiguration> configs;
  configs.reserve(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    configs.emplace_back(Eigen::VectorXd(q.row(i).transpose()));
  }
  return CalibrationPlan(std::move(configs));
}

Eigen::VectorXd residual_vector(const ManipulatorModel& model,
                                const ParameterDeviation& dev,
                                const CalibrationPlan& plan,
                                const MeasurementSet& measurements) {
  require_aligned(model, plan, &measurements);
  const int m = plan.num_experiments();
  Eigen::VectorXd r(2 * m);
  for (int i = 0; i < m; ++i) {
    const PlanarPosition predicted = forward_kinematics(
        model, plan.configs[static_cast<std::size_t>(i)], dev);
    const PlanarPosition& measured =
        measurements.positions[static_cast<std::size_t>(i)];
    r(2 * i) = measured.x - predicted.x;
    r(2 * i + 1) = measured.y - predicted.y;
  }
  return r;
}

Eigen::MatrixXd stacked_jacobian(const ManipulatorModel& model,
                                 const ParameterDeviation& dev,
                                 const CalibrationPlan& plan) {
  require_aligned(model, plan, nullptr);
  const int m = plan.num_experiments();
  const int n = model.num_links();
  Eigen::MatrixXd Ja(2 * m, 2 * n);
  for (int i = 0; i < m; ++i) {
    Ja.middleRows(2 * i, 2) =
        jacobian(model, plan.configs[static_cast<std::size_t>(i)], dev);
  }
  return Ja;
}

ParameterDeviation solve_linearized(const ManipulatorModel& model,
                                    const ParameterDeviation& dev,
                                    const CalibrationPlan& plan,
                                    const MeasurementSet& measurements) {
  const Eigen::MatrixXd Ja = stacked_jacobian(model, dev, plan);
  const Eigen::VectorXd rhs = residual_vector(model, dev, plan, measurements);

  if (Ja.rows() < Ja.cols()) {
    throw RankDeficient("stacked Jacobian is " + std::to_string(Ja.rows()) +
                        "x" + std::to_string(Ja.cols()) +
                        "; need at least as many scalar measurements as "
                        "parameters (m >= n)");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      Ja, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smax > 0.0) || smin < kRankTolerance * smax) {
    throw RankDeficient(
        "stacked Jacobian is rank deficient (singular value ratio " +
        std::to_string(smax > 0.0 ? smin / smax : 0.0) +
        "); the plan is not identifiable");
  }
  return ParameterDeviation::from_packed(svd.solve(rhs));
}

IdentificationResult identify(const ManipulatorModel& model,
                              const CalibrationPlan& plan,
                              const MeasurementSet& measurements,
                              const IdentifyOptions& opts) {
  require_aligned(model, plan, &measurements);

  IdentificationResult result;
  result.deviation = ParameterDeviation::zero(model.num_links());
  result.residual_history.push_back(
      residual_vector(model, result.deviation, plan, measurements).norm());

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const ParameterDeviation step =
        solve_linearized(model, result.deviation, plan, measurements);
    result.deviation = apply_deviation(result.deviation, step);
    result.iterations = iter;
    result.residual_history.push_back(
        residual_vector(model, result.deviation, plan, measurements).norm());
    if (step.packed().norm() < opts.tol) {
      result.converged = true;
      break;
    }
  }
  result.final_residual_norm = result.residual_history.back();
  return result;
}

}  // namespace plancal
