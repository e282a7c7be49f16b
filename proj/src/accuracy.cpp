#include "plancal/accuracy.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "plancal/errors.hpp"

namespace plancal {

namespace {

// Relative eigenvalue cutoff separating singular-by-design information
// matrices from round-off.
constexpr double kConditioningTolerance = 1e-10;

Eigen::MatrixXd cumulative_angle_rows(const ManipulatorModel& model,
                                      const CalibrationPlan& plan,
                                      const ParameterDeviation& dev) {
  if (plan.num_joints() != model.num_links()) {
    throw DimensionMismatch(
        "plan has " + std::to_string(plan.num_joints()) +
        " joints but the model has " + std::to_string(model.num_links()) +
        " links");
  }
  Eigen::MatrixXd theta(plan.num_experiments(), plan.num_joints());
  for (int i = 0; i < plan.num_experiments(); ++i) {
    theta.row(i) =
        cumulative_angles(plan.configs[static_cast<std::size_t>(i)], dev)
            .transpose();
  }
  return theta;
}

void validate_blocks(const InformationBlocks& blocks) {
  const int n = blocks.n();
  const double bound = static_cast<double>(blocks.m) * (1.0 + 1e-12);
  for (int j = 0; j < n; ++j) {
    if (blocks.C(j, j) != static_cast<double>(blocks.m) ||
        blocks.S(j, j) != 0.0) {
      throw Error("InformationBlocks: diagonal invariant violated");
    }
    for (int k = 0; k < n; ++k) {
      if (blocks.C(j, k) != blocks.C(k, j) ||
          blocks.S(j, k) != -blocks.S(k, j)) {
        throw Error("InformationBlocks: symmetry invariant violated");
      }
      if (std::abs(blocks.C(j, k)) > bound ||
          std::abs(blocks.S(j, k)) > bound) {
        throw Error("InformationBlocks: entry bound |.| <= m violated");
      }
    }
  }
}

AccuracyReport report_from_information(const InformationBlocks& blocks,
                                       double sigma) {
  if (sigma < 0.0) {
    throw Error("measurement stddev must be nonnegative, got " +
                std::to_string(sigma));
  }
  const Eigen::MatrixXd info = blocks.assembled();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  if (es.info() != Eigen::Success) {
    throw SingularInformation("eigendecomposition of the information matrix "
                              "failed");
  }
  const Eigen::VectorXd& lambda = es.eigenvalues();  // ascending
  const double lmax = lambda(lambda.size() - 1);
  if (!(lmax > 0.0) || lambda(0) < kConditioningTolerance * lmax) {
    throw SingularInformation(
        "information matrix is singular at the conditioning threshold "
        "(eigenvalue ratio " +
        std::to_string(lmax > 0.0 ? lambda(0) / lmax : 0.0) +
        "); the plan is not identifiable");
  }

  AccuracyReport report;
  report.covariance = sigma * sigma * es.eigenvectors() *
                      lambda.cwiseInverse().asDiagonal() *
                      es.eigenvectors().transpose();
  const int n = blocks.n();
  report.sigma_q = report.covariance.diagonal().head(n).cwiseSqrt();
  report.sigma_l = report.covariance.diagonal().tail(n).cwiseSqrt();
  return report;
}

}  // namespace

Eigen::MatrixXd InformationBlocks::assembled() const {
  const int dim = n();
  const auto L = lengths.asDiagonal();
  Eigen::MatrixXd info(2 * dim, 2 * dim);
  info.topLeftCorner(dim, dim) = L * C * L;
  info.topRightCorner(dim, dim) = L * S;
  info.bottomLeftCorner(dim, dim) = info.topRightCorner(dim, dim).transpose();
  info.bottomRightCorner(dim, dim) = C;
  return info;
}

InformationBlocks information_from_cumulative(const Eigen::VectorXd& lengths,
                                              const Eigen::MatrixXd& theta) {
  if (lengths.size() != theta.cols()) {
    throw DimensionMismatch("information_from_cumulative: " +
                            std::to_string(lengths.size()) + " lengths vs " +
                            std::to_string(theta.cols()) + " angle columns");
  }
  const int n = static_cast<int>(theta.cols());
  const int m = static_cast<int>(theta.rows());

  InformationBlocks blocks;
  blocks.lengths = lengths;
  blocks.m = m;
  blocks.C = Eigen::MatrixXd::Zero(n, n);
  blocks.S = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    blocks.C(j, j) = static_cast<double>(m);
    for (int k = j + 1; k < n; ++k) {
      double c = 0.0;
      double s = 0.0;
      for (int i = 0; i < m; ++i) {
        const double diff = theta(i, k) - theta(i, j);
        c += std::cos(diff);
        s += std::sin(diff);
      }
      blocks.C(j, k) = c;
      blocks.C(k, j) = c;
      blocks.S(j, k) = s;
      blocks.S(k, j) = -s;
    }
  }
  validate_blocks(blocks);
  return blocks;
}

InformationBlocks information_matrix(const ManipulatorModel& model,
                                     const CalibrationPlan& plan) {
  return information_matrix_at(model, plan,
                               ParameterDeviation::zero(model.num_links()));
}

InformationBlocks information_matrix_at(const ManipulatorModel& model,
                                        const CalibrationPlan& plan,
                                        const ParameterDeviation& dev) {
  return information_from_cumulative(model.link_lengths() + dev.dl,
                                     cumulative_angle_rows(model, plan, dev));
}

AccuracyReport covariance(const ManipulatorModel& model,
                          const CalibrationPlan& plan, double sigma) {
  return report_from_information(information_matrix(model, plan), sigma);
}

AccuracyReport covariance_at(const ManipulatorModel& model,
                             const CalibrationPlan& plan, double sigma,
                             const ParameterDeviation& dev) {
  return report_from_information(information_matrix_at(model, plan, dev),
                                 sigma);
}

AccuracyReport analytic_optimal_stddev(const ManipulatorModel& model, int m,
                                       double sigma) {
  if (m < 1) {
    throw Error("analytic_optimal_stddev: m must be >= 1, got " +
                std::to_string(m));
  }
  if (sigma < 0.0) {
    throw Error("measurement stddev must be nonnegative, got " +
                std::to_string(sigma));
  }
  const int n = model.num_links();
  const double root_m = std::sqrt(static_cast<double>(m));

  AccuracyReport report;
  report.sigma_q =
      (sigma / root_m) * model.link_lengths().cwiseInverse();
  report.sigma_l = Eigen::VectorXd::Constant(n, sigma / root_m);
  report.covariance = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    report.covariance(i, i) = report.sigma_q(i) * report.sigma_q(i);
    report.covariance(n + i, n + i) = report.sigma_l(i) * report.sigma_l(i);
  }
  return report;
}

}  // namespace plancal
