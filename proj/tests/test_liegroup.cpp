#include <gtest/gtest.h>

#include "ctgp/errors.hpp"
#include "ctgp/liegroup.hpp"
#include "oracles.hpp"

using namespace ctgp;

TEST(Wedge, ZeroAndUnitCases) {
  EXPECT_TRUE(wedge(Twist::Zero()).isZero(0.0));
  Twist x = Twist::Zero();
  x(0) = 1.0;
  Eigen::Matrix4d expected = Eigen::Matrix4d::Zero();
  expected(0, 3) = 1.0;
  EXPECT_TRUE(wedge(x) == expected);
  x.setZero();
  x(5) = 1.0;
  const Eigen::Matrix4d w = wedge(x);
  EXPECT_EQ(w(0, 1), -1.0);
  EXPECT_EQ(w(1, 0), 1.0);
  EXPECT_EQ(w.cwiseAbs().sum(), 2.0);
}

TEST(Curlywedge, BlocksAndAntisymmetry) {
  EXPECT_TRUE(curlywedge(Twist::Zero()).isZero(0.0));
  Twist z = Twist::Zero();
  z(5) = 1.0;
  const Matrix6 c = curlywedge(z);
  EXPECT_TRUE((c.topRightCorner<3, 3>().isZero(0.0)));
  EXPECT_TRUE((c.topLeftCorner<3, 3>() == skew(Eigen::Vector3d::UnitZ())));
  EXPECT_TRUE((c.bottomRightCorner<3, 3>() == skew(Eigen::Vector3d::UnitZ())));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Twist x = oracle::random_ball(rng, 3.0), y = oracle::random_ball(rng, 3.0);
    EXPECT_LT((curlywedge(x) * y + curlywedge(y) * x).norm(), 1e-14);
  }
}

TEST(ExpMap, MatchesTaylorSeries) {
  EXPECT_TRUE(exp_map(Twist::Zero()).matrix().isIdentity(0.0));
  Twist t;
  t << 1, 2, 3, 0, 0, 0;
  const Pose p = exp_map(t);
  EXPECT_TRUE(p.rotation().isIdentity(0.0));
  EXPECT_TRUE(p.translation() == Eigen::Vector3d(1, 2, 3));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Twist x = oracle::random_twist(rng, 1.0, 3.14159);
    EXPECT_LT((exp_map(x).matrix() - oracle::se3_matrix_exp(x)).norm(), 1e-12);
  }
  for (double small : {1e-3, 1e-7, 0.099, 0.101}) {
    Twist x = oracle::random_twist(rng, 1.0, 1.0);
    x.tail<3>() = x.tail<3>().normalized() * small;
    EXPECT_LT((exp_map(x).matrix() - oracle::se3_matrix_exp(x)).norm(), 1e-14);
  }
}

TEST(LogMap, RoundTripAndErrors) {
  EXPECT_TRUE(log_map(Pose::identity()).isZero(0.0));
  const Twist t = log_map(Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 2, 3)));
  EXPECT_LT((t - (Twist() << 1, 2, 3, 0, 0, 0).finished()).norm(), 1e-15);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Twist x = oracle::random_twist(rng, 5.0, 3.0);
    EXPECT_LT((log_map(exp_map(x)) - x).norm(), 1e-9);
  }
  for (double a : {1e-9, 0.05, 0.0999, 0.1001, 2.3, 2.36, 3.0, 3.14}) {
    Twist x = oracle::random_twist(rng, 1.0, 1.0);
    x.tail<3>() = x.tail<3>().normalized() * a;
    EXPECT_LT((log_map(exp_map(x)) - x).norm(), 1e-9) << a;
  }
  Twist pi = Twist::Zero();
  pi(3) = 3.14159265358979323846;
  EXPECT_THROW(log_map(exp_map(pi)), IllConditionedError);
}

TEST(LeftJacobian, SeriesOracleAndInverse) {
  EXPECT_TRUE(left_jacobian(Twist::Zero()).isIdentity(0.0));
  EXPECT_TRUE(left_jacobian_inv(Twist::Zero()).isIdentity(0.0));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Twist x = oracle::random_ball(rng, 1.0);
    EXPECT_LT((left_jacobian(x) - oracle::jacobian_series(x)).norm(), 1e-12);
  }
  for (int i = 0; i < 200; ++i) {
    const Twist x = oracle::random_twist(rng, 3.0, 3.0);
    EXPECT_LT((left_jacobian(x) * left_jacobian_inv(x) - Matrix6::Identity()).norm(), 1e-9);
  }
  Twist x = oracle::random_ball(rng, 1.0).normalized() * 1e-4;
  EXPECT_LT((left_jacobian_inv(x) - (Matrix6::Identity() - 0.5 * curlywedge(x))).norm(), 1e-8);
  Twist big = Twist::Zero();
  big(5) = 2.0 * 3.14159265358979323846;
  EXPECT_THROW(left_jacobian_inv(big), IllConditionedError);
}

TEST(LeftJacobian, FirstOrderPerturbation) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Twist x = oracle::random_twist(rng, 2.0, 2.5);
    const Twist d = oracle::random_ball(rng, 1.0).normalized() * 1e-6;
    const Eigen::Matrix4d lhs = exp_map(x + d).matrix();
    const Eigen::Matrix4d rhs = (exp_map(left_jacobian(x) * d) * exp_map(x)).matrix();
    EXPECT_LT((lhs - rhs).norm(), 1e-9);
  }
}

TEST(LeftJacobian, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    const Twist x = oracle::random_twist(rng, 2.0, 2.5);
    const Twist y = oracle::random_ball(rng, 2.0);
    const Matrix6 D = left_jacobian_derivative(x, y);
    const Matrix6 Di = left_jacobian_inv_derivative(x, y);
    for (int j = 0; j < 6; ++j) {
      Twist h = Twist::Zero();
      h(j) = 1e-6;
      const Twist fd = (left_jacobian(x + h) * y - left_jacobian(x - h) * y) / 2e-6;
      const Twist fdi = (left_jacobian_inv(x + h) * y - left_jacobian_inv(x - h) * y) / 2e-6;
      EXPECT_LT((D.col(j) - fd).norm(), 1e-8);
      EXPECT_LT((Di.col(j) - fdi).norm(), 1e-8);
    }
  }
}

TEST(Pose, AdjointAndClosure) {
  std::mt19937_64 rng(7);
  const Pose T = exp_map(oracle::random_twist(rng, 2.0, 2.0));
  const Twist x = oracle::random_ball(rng, 1.0);
  EXPECT_LT((exp_map(T.adjoint() * x).matrix() - (T * exp_map(x) * T.inverse()).matrix()).norm(), 1e-12);
  Pose chain;
  for (int i = 0; i < 1000; ++i) chain = (exp_map(oracle::random_twist(rng, 1.0, 3.0)) * chain).normalized();
  EXPECT_TRUE(chain.is_valid(1e-9));
  const Eigen::Vector3d p(1, 2, 3);
  const Pose w = Pose::from_world(so3::exp(Eigen::Vector3d(0.1, 0.2, 0.3)), p);
  EXPECT_LT((w.position() - p).norm(), 1e-15);
}
