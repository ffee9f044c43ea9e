#include "ctgp/liegroup.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "ctgp/errors.hpp"

namespace ctgp {

namespace {

constexpr double kSeriesThreshold = 0.1;
constexpr double kPi = 3.14159265358979323846;

struct So3Coeffs {
  double a;  // sin(t)/t
  double b;  // (1 - cos(t))/t^2
  double c;  // (t - sin(t))/t^3
};

So3Coeffs so3_coeffs(double t) {
  const double t2 = t * t;
  if (t < kSeriesThreshold) {
    const double t4 = t2 * t2, t6 = t4 * t2;
    return {1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0,
            0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0};
  }
  const double s = std::sin(t), co = std::cos(t);
  return {s / t, (1.0 - co) / t2, (t - s) / (t2 * t)};
}

// (1 - (t/2) cot(t/2)) / t^2
double inv_coeff(double t) {
  const double t2 = t * t;
  if (t < kSeriesThreshold) {
    const double t4 = t2 * t2, t6 = t4 * t2;
    return 1.0 / 12.0 + t2 / 720.0 + t4 / 30240.0 + t6 / 1209600.0;
  }
  return (1.0 - 0.5 * t / std::tan(0.5 * t)) / t2;
}

Eigen::Matrix3d q_block(const Eigen::Vector3d& rho, const Eigen::Vector3d& phi) {
  const double t = phi.norm();
  const double t2 = t * t;
  double c1, c2, c3;
  if (t < kSeriesThreshold) {
    const double t4 = t2 * t2, t6 = t4 * t2;
    c1 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0;
    c2 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0 - t6 / 3628800.0;
    c3 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0;
  } else {
    const double s = std::sin(t), co = std::cos(t);
    c1 = (t - s) / (t2 * t);
    c2 = (t2 + 2.0 * co - 2.0) / (2.0 * t2 * t2);
    c3 = (2.0 * t - 3.0 * s + t * co) / (2.0 * t2 * t2 * t);
  }
  const Eigen::Matrix3d P = skew(phi);
  const Eigen::Matrix3d R = skew(rho);
  const Eigen::Matrix3d PR = P * R;
  const Eigen::Matrix3d RP = R * P;
  const Eigen::Matrix3d PRP = PR * P;
  return 0.5 * R + c1 * (PR + RP + PRP) + c2 * (P * PR + RP * P - 3.0 * PRP) + c3 * (PRP * P + P * PRP);
}

}  // namespace

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Matrix6 Pose::adjoint() const {
  Matrix6 ad = Matrix6::Zero();
  ad.topLeftCorner<3, 3>() = rotation_;
  ad.bottomRightCorner<3, 3>() = rotation_;
  ad.topRightCorner<3, 3>() = skew(translation_) * rotation_;
  return ad;
}

Pose Pose::normalized() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return {svd.matrixU() * d * svd.matrixV().transpose(), translation_};
}

bool Pose::is_valid(double tol) const {
  if (!rotation_.allFinite() || !translation_.allFinite()) return false;
  return (rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity()).norm() <= tol &&
         std::abs(rotation_.determinant() - 1.0) <= tol;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix4d wedge(const Twist& x) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(x.tail<3>());
  m.topRightCorner<3, 1>() = x.head<3>();
  return m;
}

Twist vee(const Eigen::Matrix4d& m) {
  Twist x;
  x << m(0, 3), m(1, 3), m(2, 3), m(2, 1), m(0, 2), m(1, 0);
  return x;
}

Matrix6 curlywedge(const Twist& x) {
  Matrix6 m = Matrix6::Zero();
  const Eigen::Matrix3d P = skew(x.tail<3>());
  m.topLeftCorner<3, 3>() = P;
  m.bottomRightCorner<3, 3>() = P;
  m.topRightCorner<3, 3>() = skew(x.head<3>());
  return m;
}

namespace so3 {

Eigen::Matrix3d exp(const Eigen::Vector3d& phi) {
  const So3Coeffs k = so3_coeffs(phi.norm());
  const Eigen::Matrix3d P = skew(phi);
  return Eigen::Matrix3d::Identity() + k.a * P + k.b * P * P;
}

double angle(const Eigen::Matrix3d& rotation) {
  const Eigen::Vector3d w(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                          rotation(1, 0) - rotation(0, 1));
  return std::atan2(0.5 * w.norm(), 0.5 * (rotation.trace() - 1.0));
}

Eigen::Vector3d log(const Eigen::Matrix3d& rotation) {
  const Eigen::Vector3d w =
      0.5 * Eigen::Vector3d(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                            rotation(1, 0) - rotation(0, 1));
  const double co = 0.5 * (rotation.trace() - 1.0);
  const double t = std::atan2(w.norm(), co);
  if (kPi - t < 1e-6) throw IllConditionedError("rotation logarithm ill-conditioned near pi");
  if (t < kSeriesThreshold) return w / so3_coeffs(t).a;
  if (t < 0.75 * kPi) return w * (t / std::sin(t));
  const Eigen::Matrix3d aat =
      (0.5 * (rotation + rotation.transpose()) - co * Eigen::Matrix3d::Identity()) / (1.0 - co);
  Eigen::Index i;
  aat.diagonal().maxCoeff(&i);
  Eigen::Vector3d axis = aat.col(i).normalized();
  if (axis.dot(w) < 0.0) axis = -axis;
  return t * axis;
}

Eigen::Matrix3d left_jacobian(const Eigen::Vector3d& phi) {
  const So3Coeffs k = so3_coeffs(phi.norm());
  const Eigen::Matrix3d P = skew(phi);
  return Eigen::Matrix3d::Identity() + k.b * P + k.c * P * P;
}

Eigen::Matrix3d left_jacobian_inv(const Eigen::Vector3d& phi) {
  const double t = phi.norm();
  if (t >= 2.0 * kPi - 1e-6) throw IllConditionedError("inverse left Jacobian ill-conditioned near 2*pi");
  const Eigen::Matrix3d P = skew(phi);
  return Eigen::Matrix3d::Identity() - 0.5 * P + inv_coeff(t) * P * P;
}

}  // namespace so3

Pose exp_map(const Twist& x) {
  const Eigen::Vector3d phi = x.tail<3>();
  return {so3::exp(phi), so3::left_jacobian(phi) * x.head<3>()};
}

Twist log_map(const Pose& pose) {
  const Eigen::Vector3d phi = so3::log(pose.rotation());
  return make_twist(so3::left_jacobian_inv(phi) * pose.translation(), phi);
}

Matrix6 left_jacobian(const Twist& x) {
  const Eigen::Vector3d phi = x.tail<3>();
  Matrix6 J = Matrix6::Zero();
  const Eigen::Matrix3d Jr = so3::left_jacobian(phi);
  J.topLeftCorner<3, 3>() = Jr;
  J.bottomRightCorner<3, 3>() = Jr;
  J.topRightCorner<3, 3>() = q_block(x.head<3>(), phi);
  return J;
}

Matrix6 left_jacobian_inv(const Twist& x) {
  const Eigen::Vector3d phi = x.tail<3>();
  const Eigen::Matrix3d Ji = so3::left_jacobian_inv(phi);
  Matrix6 J = Matrix6::Zero();
  J.topLeftCorner<3, 3>() = Ji;
  J.bottomRightCorner<3, 3>() = Ji;
  J.topRightCorner<3, 3>() = -Ji * q_block(x.head<3>(), phi) * Ji;
  return J;
}

Matrix6 left_jacobian_derivative(const Twist& x, const Twist& y) {
  const Matrix6 X = curlywedge(x);
  Matrix6 D = Matrix6::Zero();
  Matrix6 sum = Matrix6::Zero();
  Twist f = y;
  double fact = 1.0;
  for (int n = 1; n <= 200; ++n) {
    D = X * D - curlywedge(f);
    f = X * f;
    fact *= static_cast<double>(n + 1);
    const Matrix6 term = D / fact;
    sum += term;
    if (n > 4 && term.norm() <= 1e-18 * (1.0 + sum.norm())) break;
  }
  return sum;
}

Matrix6 left_jacobian_inv_derivative(const Twist& x, const Twist& y) {
  const Matrix6 Ji = left_jacobian_inv(x);
  return -Ji * left_jacobian_derivative(x, Ji * y);
}

}  // namespace ctgp
