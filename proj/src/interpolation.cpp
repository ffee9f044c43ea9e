#include "ctgp/interpolation.hpp"

#include <cmath>

#include "ctgp/errors.hpp"

namespace ctgp {

namespace {

void check_tau(const IntervalBlocks& blocks, double tau) {
  const double tol = 1e-12 * std::max(1.0, std::abs(blocks.t_end()));
  if (tau < blocks.t_begin() - tol || tau > blocks.t_end() + tol)
    throw DomainError("query time outside node interval");
}

}  // namespace

InterpolationTerms interpolation_terms(const IntervalBlocks& blocks, double tau) {
  check_tau(blocks, tau);
  InterpolationTerms r;
  r.tau = tau;
  r.integral = blocks.input_integral(tau);
  if (tau <= blocks.t_begin()) {
    r.lambda.setIdentity();
    r.psi.setZero();
    r.Q_tau.setZero();
    r.phi_end = blocks.phi();
    return r;
  }
  if (tau >= blocks.t_end()) {
    r.lambda.setZero();
    r.psi.setIdentity();
    r.Q_tau = blocks.Q();
    r.phi_end.setIdentity();
    return r;
  }
  r.Q_tau = blocks.Q(tau);
  r.phi_end = blocks.phi_to_end(tau);
  r.psi = r.Q_tau * r.phi_end.transpose() * blocks.Q_inv();
  r.lambda = blocks.phi_from_start(tau) - r.psi * blocks.phi();
  return r;
}

std::pair<Matrix12, Matrix12> lambda_psi(const IntervalBlocks& blocks, double tau) {
  const InterpolationTerms r = interpolation_terms(blocks, tau);
  return {r.lambda, r.psi};
}

InterpolatedState interpolate_state(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                                    double tau) {
  return interpolate_state(node_k, node_k1, blocks, interpolation_terms(blocks, tau));
}

InterpolatedState interpolate_state(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                                    const InterpolationTerms& r) {
  const Pose rel = node_k1.pose * node_k.pose.inverse();
  const Twist xi = log_map(rel);
  const Matrix6 Ji = left_jacobian_inv(xi);

  Vector12 g_k = Vector12::Zero();
  g_k.tail<6>() = node_k.bias;
  Vector12 g_k1;
  g_k1 << xi, Ji * node_k1.bias;

  InterpolatedState s;
  s.gamma = r.integral + r.lambda * g_k + r.psi * (g_k1 - blocks.input_integral());
  const Twist xi_t = s.gamma.head<6>();
  const Twist psi_t = s.gamma.tail<6>();
  if (xi_t.tail<3>().norm() >= 3.14159265358979323846)
    throw IntervalTooLongError("interpolated local pose exceeds the exponential chart");
  const Pose T_loc = exp_map(xi_t);
  const Matrix6 J_t = left_jacobian(xi_t);
  s.pose = (T_loc * node_k.pose).normalized();
  s.bias = J_t * psi_t;

  // Local-state perturbations of both nodes.
  Matrix12 G2 = Matrix12::Zero();
  G2.topLeftCorner<6, 6>() = Ji;
  G2.bottomLeftCorner<6, 6>() = left_jacobian_inv_derivative(xi, node_k1.bias) * Ji;
  G2.bottomRightCorner<6, 6>() = Ji;
  Matrix12 X2 = Matrix12::Zero();
  X2.topLeftCorner<6, 6>() = rel.adjoint();
  Matrix12 E = Matrix12::Zero();
  E.bottomRightCorner<6, 6>().setIdentity();

  s.G.setZero();
  s.G.topLeftCorner<6, 6>() = J_t;
  s.G.bottomLeftCorner<6, 6>() = left_jacobian_derivative(xi_t, psi_t);
  s.G.bottomRightCorner<6, 6>() = J_t;

  Eigen::Matrix<double, 12, 24> dgamma;
  dgamma.leftCols<12>() = r.lambda * E - r.psi * G2 * X2;
  dgamma.rightCols<12>() = r.psi * G2;
  s.H = s.G * dgamma;
  s.H.topLeftCorner<6, 6>() += T_loc.adjoint();
  return s;
}

QueryResult interpolate_mean(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                             double tau) {
  QueryResult q;
  if (tau == node_k.time || tau == node_k1.time) {
    check_tau(blocks, tau);
    const StateNode& n = tau == node_k.time ? node_k : node_k1;
    q.pose = n.pose;
    q.bias = n.bias;
  } else {
    const InterpolatedState s = interpolate_state(node_k, node_k1, blocks, tau);
    q.pose = s.pose;
    q.bias = s.bias;
  }
  q.velocity = q.bias + blocks.inputs(tau).v;
  return q;
}

Matrix12 interpolate_covariance(const StateNode& node_k, const StateNode& node_k1, const NodePairCovariance& cov,
                                const IntervalBlocks& blocks, double tau, bool* approximate) {
  if (approximate) *approximate = !cov.cross.has_value();
  if (tau == blocks.t_begin()) {
    check_tau(blocks, tau);
    return cov.k;
  }
  if (tau == blocks.t_end()) return cov.k1;
  Eigen::Matrix<double, 24, 24> joint = Eigen::Matrix<double, 24, 24>::Zero();
  joint.topLeftCorner<12, 12>() = cov.k;
  joint.bottomRightCorner<12, 12>() = cov.k1;
  if (cov.cross) {
    joint.topRightCorner<12, 12>() = *cov.cross;
    joint.bottomLeftCorner<12, 12>() = cov.cross->transpose();
  }
  const InterpolationTerms r = interpolation_terms(blocks, tau);
  const InterpolatedState s = interpolate_state(node_k, node_k1, blocks, r);
  Matrix12 noise = r.Q_tau - r.Q_tau * r.phi_end.transpose() * blocks.Q_inv() * r.phi_end * r.Q_tau;
  noise = 0.5 * (noise + noise.transpose());
  Matrix12 out = s.H * joint * s.H.transpose() + s.G * noise * s.G.transpose();
  out = 0.5 * (out + out.transpose());
  if (!out.allFinite()) throw IllConditionedError("interpolated covariance is not finite");
  return out;
}

}  // namespace ctgp
