#pragma once

#include <optional>
#include <utility>

#include "ctgp/factors.hpp"
#include "ctgp/prior.hpp"

namespace ctgp {

struct QueryResult {
  Pose pose;
  /// Full velocity, bias + v_in(tau).
  Twist velocity = Twist::Zero();
  Twist bias = Twist::Zero();
  std::optional<Matrix12> covariance;
  /// Set when the covariance ignored the cross-covariance of the bracketing nodes.
  bool covariance_approximate = false;
};

/// Terms that depend only on the interval blocks and tau.
struct InterpolationTerms {
  double tau = 0.0;
  Matrix12 lambda = Matrix12::Zero();
  Matrix12 psi = Matrix12::Zero();
  Matrix12 Q_tau = Matrix12::Zero();
  Matrix12 phi_end = Matrix12::Identity();
  Vector12 integral = Vector12::Zero();
};

InterpolationTerms interpolation_terms(const IntervalBlocks& blocks, double tau);

/// Lambda(tau) and Psi(tau) of the interval.
std::pair<Matrix12, Matrix12> lambda_psi(const IntervalBlocks& blocks, double tau);

/// Interpolated state with its linearization onto the bracketing nodes:
/// x_tau = H [x_k; x_k1] + G noise, perturbations as in apply_update.
struct InterpolatedState {
  Pose pose;
  Twist bias = Twist::Zero();
  Vector12 gamma = Vector12::Zero();
  Eigen::Matrix<double, 12, 24> H = Eigen::Matrix<double, 12, 24>::Zero();
  Matrix12 G = Matrix12::Identity();
};

InterpolatedState interpolate_state(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                                    double tau);
InterpolatedState interpolate_state(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                                    const InterpolationTerms& terms);

QueryResult interpolate_mean(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                             double tau);

/// Marginal covariances of two adjacent nodes and, when known, their cross-covariance.
struct NodePairCovariance {
  Matrix12 k = Matrix12::Zero();
  Matrix12 k1 = Matrix12::Zero();
  std::optional<Matrix12> cross;  // cov(x_k, x_k1)
};

/// Posterior covariance at tau in the local perturbation coordinates of the
/// interpolated state. Without a cross term the result is an approximation
/// and `approximate` is set.
Matrix12 interpolate_covariance(const StateNode& node_k, const StateNode& node_k1, const NodePairCovariance& cov,
                                const IntervalBlocks& blocks, double tau, bool* approximate = nullptr);

}  // namespace ctgp
