#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ctgp {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;

/// Element of se(3) stored translation-first: (rho; phi).
///
/// Used for body-centric velocities, local pose perturbations, strains and
/// the control inputs that drive them.
using Twist = Vector6;

inline Eigen::Vector3d linear(const Twist& x) { return x.head<3>(); }
inline Eigen::Vector3d angular(const Twist& x) { return x.tail<3>(); }
inline Twist make_twist(const Eigen::Vector3d& lin, const Eigen::Vector3d& ang) {
  Twist x;
  x << lin, ang;
  return x;
}

/// Rigid transform in SE(3).
///
/// Poses follow the left-perturbation convention used throughout the
/// library: the prior integrates dT/dt = varpi^ T, so a Pose maps world
/// coordinates into the body frame. position() returns the body origin
/// expressed in the world frame.
class Pose {
 public:
  Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return {}; }
  static Pose from_matrix(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }
  /// Pose whose body origin sits at `position` with body axes `world_from_body`.
  static Pose from_world(const Eigen::Matrix3d& world_from_body, const Eigen::Vector3d& position) {
    return {world_from_body.transpose(), -world_from_body.transpose() * position};
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d position() const { return -rotation_.transpose() * translation_; }
  Eigen::Matrix3d world_from_body() const { return rotation_.transpose(); }

  Eigen::Matrix4d matrix() const;
  Pose inverse() const { return {rotation_.transpose(), -rotation_.transpose() * translation_}; }
  Pose operator*(const Pose& other) const {
    return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
  }
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const { return rotation_ * point + translation_; }

  /// 6x6 adjoint, translation-first.
  Matrix6 adjoint() const;

  /// Same pose with the rotation projected onto the nearest orthonormal matrix.
  Pose normalized() const;

  /// Orthonormality and determinant checks within `tol`.
  bool is_valid(double tol = 1e-9) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

Eigen::Matrix4d wedge(const Twist& x);
Twist vee(const Eigen::Matrix4d& m);

/// Adjoint-algebra operator; curlywedge(x) * y is the Lie bracket [x, y].
Matrix6 curlywedge(const Twist& x);

Pose exp_map(const Twist& x);

/// Inverse of exp_map. Throws IllConditionedError when the rotation angle is
/// within 1e-6 of pi.
Twist log_map(const Pose& pose);

/// Left Jacobian of SE(3), closed form.
Matrix6 left_jacobian(const Twist& x);

/// Inverse left Jacobian. Throws IllConditionedError for rotation angles
/// within 1e-6 of 2*pi or beyond.
Matrix6 left_jacobian_inv(const Twist& x);

/// Derivative d(J(x) y)/dx at fixed y, evaluated by its (entire) power series.
Matrix6 left_jacobian_derivative(const Twist& x, const Twist& y);

/// Derivative d(J(x)^{-1} y)/dx at fixed y.
Matrix6 left_jacobian_inv_derivative(const Twist& x, const Twist& y);

namespace so3 {
Eigen::Matrix3d exp(const Eigen::Vector3d& phi);
/// Throws IllConditionedError when the angle is within 1e-6 of pi.
Eigen::Vector3d log(const Eigen::Matrix3d& rotation);
/// Rotation angle in [0, pi], no conditioning checks.
double angle(const Eigen::Matrix3d& rotation);
Eigen::Matrix3d left_jacobian(const Eigen::Vector3d& phi);
Eigen::Matrix3d left_jacobian_inv(const Eigen::Vector3d& phi);
}  // namespace so3

}  // namespace ctgp
