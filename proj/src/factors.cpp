#include "ctgp/factors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ctgp/errors.hpp"
#include "ctgp/interpolation.hpp"

namespace ctgp {

namespace {

template <int N>
Eigen::Matrix<double, N, N> information_of(const Eigen::Matrix<double, N, N>& covariance) {
  if (!covariance.allFinite()) throw HyperparameterError("covariance has non-finite entries");
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(0.5 * (covariance + covariance.transpose()));
  if (llt.info() != Eigen::Success) throw HyperparameterError("covariance must be positive-definite");
  const Eigen::Matrix<double, N, N> inv = llt.solve(Eigen::Matrix<double, N, N>::Identity());
  return 0.5 * (inv + inv.transpose());
}

}  // namespace

void apply_update(StateNode& node, const Vector12& dx) {
  node.pose = (exp_map(dx.head<6>()) * node.pose).normalized();
  node.bias += dx.tail<6>();
}

FactorEval prior_factor_error(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                              PriorJacobian mode) {
  const double tol = 1e-9 * std::max(1.0, std::abs(blocks.t_end()));
  if (std::abs(node_k.time - blocks.t_begin()) > tol || std::abs(node_k1.time - blocks.t_end()) > tol)
    throw WiringError("prior factor nodes do not match the interval blocks");

  const Pose rel = node_k1.pose * node_k.pose.inverse();
  const Twist xi = log_map(rel);
  const Matrix6 Ji = left_jacobian_inv(xi);
  const Twist psi = Ji * node_k1.bias;
  const Matrix6 D = mode == PriorJacobian::Exact ? left_jacobian_inv_derivative(xi, node_k1.bias)
                                                 : Matrix6(0.5 * curlywedge(node_k1.bias));

  const Matrix12& phi = blocks.phi();
  FactorEval f;
  f.error.resize(12);
  f.error << xi, psi;
  f.error -= phi.rightCols<6>() * node_k.bias + blocks.input_integral();

  const Matrix6 JiAd = Ji * rel.adjoint();
  Eigen::MatrixXd Jk = Eigen::MatrixXd::Zero(12, 12);
  Jk.block<6, 6>(0, 0) = -JiAd;
  Jk.block<6, 6>(6, 0) = -D * JiAd;
  Jk.rightCols(6) = -phi.rightCols<6>();
  Eigen::MatrixXd Jk1 = Eigen::MatrixXd::Zero(12, 12);
  Jk1.block<6, 6>(0, 0) = Ji;
  Jk1.block<6, 6>(6, 0) = D * Ji;
  Jk1.block<6, 6>(6, 6) = Ji;

  f.jacobians = {{0, std::move(Jk)}, {1, std::move(Jk1)}};
  f.information = blocks.Q_inv();
  return f;
}

FactorEval range_factor_error(const StateNode& node, const Eigen::Vector3d& landmark, double measured_range,
                              double variance) {
  if (!(variance > 0.0)) throw HyperparameterError("range variance must be positive");
  const Eigen::Vector3d diff = landmark - node.pose.position();
  const double d = diff.norm();
  if (d < 1e-9) throw SingularGeometryError("robot coincides with landmark");
  FactorEval f;
  f.error = Eigen::VectorXd::Constant(1, measured_range - d);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(1, 12);
  J.block<1, 3>(0, 0) = -(node.pose.rotation() * diff).transpose() / d;
  f.jacobians = {{0, std::move(J)}};
  f.information = Eigen::MatrixXd::Constant(1, 1, 1.0 / variance);
  return f;
}

FactorEval pose_factor_error(const StateNode& node, const Pose& measured, const Matrix6& covariance) {
  const Matrix6 info = information_of<6>(covariance);
  const Twist e = log_map(measured * node.pose.inverse());
  FactorEval f;
  f.error = e;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(6, 12);
  J.leftCols(6) = -left_jacobian_inv(-e);
  f.jacobians = {{0, std::move(J)}};
  f.information = info;
  return f;
}

FactorEval position_factor_error(const StateNode& node, const Eigen::Vector3d& measured,
                                 const Eigen::Matrix3d& covariance) {
  const Eigen::Matrix3d info = information_of<3>(covariance);
  FactorEval f;
  f.error = measured - node.pose.position();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, 12);
  J.leftCols(3) = node.pose.rotation().transpose();
  f.jacobians = {{0, std::move(J)}};
  f.information = info;
  return f;
}

FactorEval velocity_factor_error(const StateNode& node, const Twist& measured, const Matrix6& covariance,
                                 const std::array<bool, 6>& mask, const Twist& v_in) {
  std::vector<int> idx;
  for (int i = 0; i < 6; ++i)
    if (mask[i]) idx.push_back(i);
  if (idx.empty()) throw DegenerateFactorError("velocity factor mask selects no component");
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd cov(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) cov(i, j) = covariance(idx[i], idx[j]);
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (cov + cov.transpose()));
  if (llt.info() != Eigen::Success) throw HyperparameterError("velocity covariance must be positive-definite");

  const Twist full = measured - (node.bias + v_in);
  FactorEval f;
  f.error.resize(m);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, 12);
  for (int i = 0; i < m; ++i) {
    f.error(i) = full(idx[i]);
    J(i, 6 + idx[i]) = -1.0;
  }
  f.jacobians = {{0, std::move(J)}};
  f.information = llt.solve(Eigen::MatrixXd::Identity(m, m));
  f.information = 0.5 * (f.information + f.information.transpose());
  return f;
}

FactorEval planar_lock_error(const StateNode& node, double information) {
  const Eigen::Matrix3d& R = node.pose.rotation();
  const Eigen::Vector3d& t = node.pose.translation();
  const Eigen::Vector3d n = R.col(2);
  FactorEval f;
  f.error.resize(7);
  f.error << t.z(), n.x(), n.y(), node.bias(1), node.bias(2), node.bias(3), node.bias(4);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(7, 12);
  J(0, 2) = 1.0;
  J(0, 3) = t.y();
  J(0, 4) = -t.x();
  const Eigen::Matrix3d dn = -skew(n);
  J.block<2, 3>(1, 3) = dn.topRows<2>();
  J(3, 7) = 1.0;
  J(4, 8) = 1.0;
  J(5, 9) = 1.0;
  J(6, 10) = 1.0;
  f.jacobians = {{0, std::move(J)}};
  f.information = Eigen::MatrixXd::Identity(7, 7) * information;
  return f;
}

FactorEval NodeFactor::evaluate(const std::vector<StateNode>& nodes, const std::vector<IntervalBlocks>&) const {
  if (index_ >= nodes.size()) throw WiringError("factor references a missing node");
  FactorEval f = inner_->evaluate(nodes[index_]);
  for (auto& j : f.jacobians) j.first = index_;
  return f;
}

FactorEval interpolated_factor(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                               double tau, const UnaryFactor& inner) {
  return interpolated_factor(node_k, node_k1, blocks, interpolation_terms(blocks, tau), inner);
}

FactorEval interpolated_factor(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                               const InterpolationTerms& terms, const UnaryFactor& inner) {
  const InterpolatedState s = interpolate_state(node_k, node_k1, blocks, terms);
  StateNode q;
  q.time = terms.tau;
  q.pose = s.pose;
  q.bias = s.bias;
  FactorEval f = inner.evaluate(q);
  const Eigen::MatrixXd J = f.jacobians.front().second * s.H;
  f.jacobians = {{0, J.leftCols(12)}, {1, J.rightCols(12)}};
  return f;
}

FactorEval InterpolatedFactor::evaluate(const std::vector<StateNode>& nodes,
                                        const std::vector<IntervalBlocks>& intervals) const {
  if (interval_ + 1 >= nodes.size() || interval_ >= intervals.size())
    throw WiringError("interpolated factor references a missing interval");
  const IntervalBlocks& blocks = intervals[interval_];
  FactorEval f = interpolated_factor(nodes[interval_], nodes[interval_ + 1], blocks, *terms(blocks), *inner_);
  f.jacobians[0].first = interval_;
  f.jacobians[1].first = interval_ + 1;
  return f;
}

std::shared_ptr<const InterpolationTerms> InterpolatedFactor::terms(const IntervalBlocks& blocks) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!terms_ || key_phi_ != blocks.phi() || key_Q_ != blocks.Q()) {
    terms_ = std::make_shared<const InterpolationTerms>(interpolation_terms(blocks, tau_));
    key_phi_ = blocks.phi();
    key_Q_ = blocks.Q();
  }
  return terms_;
}

}  // namespace ctgp
