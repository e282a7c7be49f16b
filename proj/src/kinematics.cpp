#include "plancal/kinematics.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "plancal/errors.hpp"

namespace plancal {

namespace {

void require_same_size(int a, int b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": sizes " + std::to_string(a) +
                            " and " + std::to_string(b) + " do not agree");
  }
}

}  // namespace

ManipulatorModel::ManipulatorModel(Eigen::VectorXd link_lengths)
    : link_lengths_(std::move(link_lengths)) {
  if (link_lengths_.size() < 1) {
    throw DimensionMismatch("ManipulatorModel: at least one link required");
  }
  for (Eigen::Index i = 0; i < link_lengths_.size(); ++i) {
    if (!(link_lengths_(i) > 0.0) || !std::isfinite(link_lengths_(i))) {
      throw Error("ManipulatorModel: link length " + std::to_string(i + 1) +
                  " must be positive and finite, got " +
                  std::to_string(link_lengths_(i)));
    }
  }
}

ManipulatorModel::ManipulatorModel(std::initializer_list<double> link_lengths)
    : ManipulatorModel(Eigen::Map<const Eigen::VectorXd>(
          link_lengths.begin(),
          static_cast<Eigen::Index>(link_lengths.size()))) {}

ParameterDeviation::ParameterDeviation(Eigen::VectorXd dtheta_in,
                                       Eigen::VectorXd dl_in)
    : dtheta(std::move(dtheta_in)), dl(std::move(dl_in)) {
  require_same_size(static_cast<int>(dtheta.size()),
                    static_cast<int>(dl.size()),
                    "ParameterDeviation(dtheta, dl)");
}

ParameterDeviation ParameterDeviation::zero(int n) {
  return ParameterDeviation(Eigen::VectorXd::Zero(n),
                            Eigen::VectorXd::Zero(n));
}

ParameterDeviation ParameterDeviation::from_packed(
    const Eigen::VectorXd& packed) {
  if (packed.size() % 2 != 0) {
    throw DimensionMismatch("ParameterDeviation::from_packed: length " +
                            std::to_string(packed.size()) + " is odd");
  }
  const Eigen::Index n = packed.size() / 2;
  return ParameterDeviation(packed.head(n), packed.tail(n));
}

Eigen::VectorXd ParameterDeviation::packed() const {
  Eigen::VectorXd out(dtheta.size() + dl.size());
  out << dtheta, dl;
  return out;
}

Eigen::VectorXd cumulative_angles(const JointConfiguration& config,
                                  const ParameterDeviation& dev) {
  require_same_size(config.size(), dev.size(), "cumulative_angles");
  const Eigen::Index n = config.q.size();
  Eigen::VectorXd theta(n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += config.q(i);
    theta(i) = sum + dev.dtheta(i);
  }
  return theta;
}

PlanarPosition forward_kinematics(const ManipulatorModel& model,
                                  const JointConfiguration& config,
                                  const ParameterDeviation& dev) {
  require_same_size(model.num_links(), config.size(), "forward_kinematics");
  const Eigen::VectorXd theta = cumulative_angles(config, dev);
  PlanarPosition p;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double len = model.link_lengths()(i) + dev.dl(i);
    p.x += len * std::cos(theta(i));
    p.y += len * std::sin(theta(i));
  }
  return p;
}

Eigen::MatrixXd jacobian(const ManipulatorModel& model,
                         const JointConfiguration& config,
                         const ParameterDeviation& dev) {
  require_same_size(model.num_links(), config.size(), "jacobian");
  const Eigen::Index n = config.q.size();
  const Eigen::VectorXd theta = cumulative_angles(config, dev);
  Eigen::MatrixXd J(2, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double len = model.link_lengths()(i) + dev.dl(i);
    const double c = std::cos(theta(i));
    const double s = std::sin(theta(i));
    J(0, i) = -len * s;
    J(1, i) = len * c;
    J(0, n + i) = c;
    J(1, n + i) = s;
  }
  return J;
}

ParameterDeviation apply_deviation(const ParameterDeviation& acc,
                                   const ParameterDeviation& step) {
  require_same_size(acc.size(), step.size(), "apply_deviation");
  return ParameterDeviation(acc.dtheta + step.dtheta, acc.dl + step.dl);
}

Eigen::VectorXd joint_from_cumulative(const Eigen::VectorXd& dtheta) {
  Eigen::VectorXd dq(dtheta.size());
  double prev = 0.0;
  for (Eigen::Index i = 0; i < dtheta.size(); ++i) {
    dq(i) = dtheta(i) - prev;
    prev = dtheta(i);
  }
  return dq;
}

Eigen::VectorXd cumulative_from_joint(const Eigen::VectorXd& dq) {
  Eigen::VectorXd dtheta(dq.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < dq.size(); ++i) {
    sum += dq(i);
    dtheta(i) = sum;
  }
  return dtheta;
}

}  // namespace plancal
