#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ctgp/liegroup.hpp"
#include "ctgp/prior.hpp"

namespace ctgp {

/// Estimation state at a discrete time (or arclength).
struct StateNode {
  double time = 0.0;
  Pose pose;
  Twist bias = Twist::Zero();
};

/// Linearized factor: error, Jacobians per attached node (12 columns each,
/// ordered [pose perturbation; bias perturbation]) and information matrix.
struct FactorEval {
  Eigen::VectorXd error;
  std::vector<std::pair<std::size_t, Eigen::MatrixXd>> jacobians;
  Eigen::MatrixXd information;

  double cost() const { return 0.5 * error.dot(information * error); }
};

/// Poses are perturbed on the left, T <- exp(delta) T; biases additively.
void apply_update(StateNode& node, const Vector12& dx);

enum class PriorJacobian {
  /// d(J^{-1} b)/d(xi) replaced by b^curlywedge / 2.
  Approximate,
  Exact,
};

FactorEval prior_factor_error(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                              PriorJacobian mode = PriorJacobian::Approximate);

FactorEval range_factor_error(const StateNode& node, const Eigen::Vector3d& landmark, double measured_range,
                              double variance);
FactorEval pose_factor_error(const StateNode& node, const Pose& measured, const Matrix6& covariance);
/// Residual on the world position of the body origin.
FactorEval position_factor_error(const StateNode& node, const Eigen::Vector3d& measured,
                                 const Eigen::Matrix3d& covariance);
/// Residual on the masked components of bias + v_in.
FactorEval velocity_factor_error(const StateNode& node, const Twist& measured, const Matrix6& covariance,
                                 const std::array<bool, 6>& mask, const Twist& v_in = Twist::Zero());
/// Zero-mean pseudo-measurement pinning a trajectory to the world xy-plane:
/// body z-axis along world z, body origin at z = 0, and no lateral, vertical,
/// roll or pitch velocity bias.
FactorEval planar_lock_error(const StateNode& node, double information = 1e8);

/// Measurement on a single state.
class UnaryFactor {
 public:
  virtual ~UnaryFactor() = default;
  /// Jacobians are returned under node index 0.
  virtual FactorEval evaluate(const StateNode& node) const = 0;
};

class RangeFactor : public UnaryFactor {
 public:
  RangeFactor(Eigen::Vector3d landmark, double range, double variance)
      : landmark_(std::move(landmark)), range_(range), variance_(variance) {}
  FactorEval evaluate(const StateNode& node) const override {
    return range_factor_error(node, landmark_, range_, variance_);
  }

 private:
  Eigen::Vector3d landmark_;
  double range_;
  double variance_;
};

class PoseFactor : public UnaryFactor {
 public:
  PoseFactor(Pose measured, Matrix6 covariance) : measured_(std::move(measured)), covariance_(std::move(covariance)) {}
  FactorEval evaluate(const StateNode& node) const override {
    return pose_factor_error(node, measured_, covariance_);
  }

 private:
  Pose measured_;
  Matrix6 covariance_;
};

class PositionFactor : public UnaryFactor {
 public:
  PositionFactor(Eigen::Vector3d measured, Eigen::Matrix3d covariance)
      : measured_(std::move(measured)), covariance_(std::move(covariance)) {}
  FactorEval evaluate(const StateNode& node) const override {
    return position_factor_error(node, measured_, covariance_);
  }

 private:
  Eigen::Vector3d measured_;
  Eigen::Matrix3d covariance_;
};

class VelocityFactor : public UnaryFactor {
 public:
  VelocityFactor(Twist measured, Matrix6 covariance, std::array<bool, 6> mask, Twist v_in = Twist::Zero())
      : measured_(std::move(measured)), covariance_(std::move(covariance)), mask_(mask), v_in_(std::move(v_in)) {}
  FactorEval evaluate(const StateNode& node) const override {
    return velocity_factor_error(node, measured_, covariance_, mask_, v_in_);
  }

 private:
  Twist measured_;
  Matrix6 covariance_;
  std::array<bool, 6> mask_;
  Twist v_in_;
};

class PlanarLockFactor : public UnaryFactor {
 public:
  explicit PlanarLockFactor(double information = 1e8) : information_(information) {}
  FactorEval evaluate(const StateNode& node) const override { return planar_lock_error(node, information_); }

 private:
  double information_;
};

/// Factor attached to estimation nodes, evaluated against the whole state and
/// the precomputed interval blocks.
class Factor {
 public:
  virtual ~Factor() = default;
  virtual std::vector<std::size_t> node_indices() const = 0;
  virtual FactorEval evaluate(const std::vector<StateNode>& nodes,
                              const std::vector<IntervalBlocks>& intervals) const = 0;
};

class NodeFactor : public Factor {
 public:
  NodeFactor(std::size_t index, std::shared_ptr<const UnaryFactor> inner) : index_(index), inner_(std::move(inner)) {}
  std::vector<std::size_t> node_indices() const override { return {index_}; }
  FactorEval evaluate(const std::vector<StateNode>& nodes, const std::vector<IntervalBlocks>& intervals) const override;

 private:
  std::size_t index_;
  std::shared_ptr<const UnaryFactor> inner_;
};

struct InterpolationTerms;

/// Unary measurement at a time tau inside interval k, evaluated on the
/// interpolated state and chained onto nodes k and k+1.
FactorEval interpolated_factor(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                               double tau, const UnaryFactor& inner);
FactorEval interpolated_factor(const StateNode& node_k, const StateNode& node_k1, const IntervalBlocks& blocks,
                               const InterpolationTerms& terms, const UnaryFactor& inner);

class InterpolatedFactor : public Factor {
 public:
  InterpolatedFactor(std::size_t interval, double tau, std::shared_ptr<const UnaryFactor> inner)
      : interval_(interval), tau_(tau), inner_(std::move(inner)) {}
  std::vector<std::size_t> node_indices() const override { return {interval_, interval_ + 1}; }
  FactorEval evaluate(const std::vector<StateNode>& nodes, const std::vector<IntervalBlocks>& intervals) const override;

 private:
  std::shared_ptr<const InterpolationTerms> terms(const IntervalBlocks& blocks) const;

  std::size_t interval_;
  double tau_;
  std::shared_ptr<const UnaryFactor> inner_;
  // Terms are reused while the interval's phi and Q are unchanged.
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const InterpolationTerms> terms_;
  mutable Matrix12 key_phi_;
  mutable Matrix12 key_Q_;
};

}  // namespace ctgp
