#include <gtest/gtest.h>

#include <numbers>

#include "ctgp/continuum.hpp"
#include "ctgp/errors.hpp"

using namespace ctgp;

namespace {

RodModel test_rod() {
  std::vector<double> disks;
  for (int i = 1; i <= 10; ++i) disks.push_back(0.02 * i);
  return RodModel::circular(0.2, 1e-3, 60e9, 0.3, disks);
}

TipMeasurement tip_of(const RodShape& shape, double length, bool position_only) {
  TipMeasurement m;
  m.pose = shape.pose_at(length);
  m.covariance = (Vector6() << 4e-7, 4e-7, 4e-7, 2.5e-4, 2.5e-4, 2.5e-4).finished().asDiagonal();
  m.position_only = position_only;
  return m;
}

// Forward integration of dT/ds = eps^ T from the base with RK4 on the strain queries.
Pose integrate_strain(const ShapeEstimate& est, double length, int steps) {
  Pose T = Pose::identity();
  const double h = length / steps;
  for (int i = 0; i < steps; ++i) {
    const double s = i * h;
    const Twist e0 = -est.strain_at(s);
    const Twist em = -est.strain_at(std::min(s + 0.5 * h, length));
    const Twist e1 = -est.strain_at(std::min(s + h, length));
    // Fourth-order Magnus step for a linear-in-s generator.
    const Twist omega = h / 6.0 * (e0 + 4.0 * em + e1) + h * h / 12.0 * curlywedge(e1 - e0) * (0.5 * (e0 + e1));
    T = exp_map(omega) * T;
  }
  return T;
}

}  // namespace

TEST(Units, MomentAndCurvatureRateDimensions) {
  constexpr units::Moment m = units::Force(1.0) * units::Length(5e-3);
  static_assert(std::is_same_v<std::remove_const_t<decltype(m / units::Length(1.0) / units::BendingStiffness(1.0))>,
                               units::CurvatureRate>);
  static_assert(std::is_same_v<std::remove_const_t<decltype(units::ForceDensity(1.0) / units::AxialStiffness(1.0))>,
                               units::StretchRate>);
  EXPECT_DOUBLE_EQ(m.value, 5e-3);
  const TendonRoute t{5e-3, 0.0, 0.1, 1.0};
  EXPECT_DOUBLE_EQ(t.moment_magnitude().value, 5e-3);
  EXPECT_NEAR(t.moment().norm(), 5e-3, 1e-18);
}

TEST(TensionsToInputs, IntegratedMomentMatchesPointMoment) {
  const RodModel rod = test_rod();
  const std::vector<TendonRoute> tendons{{5e-3, 0.3, 0.1, 1.0}, {8e-3, 2.0, 0.2, 0.7}, {6e-3, -1.0, 0.137, 2.0}};
  const InputLog log = actuation_samples(rod, tendons, 0.002);
  Eigen::Vector3d integral = Eigen::Vector3d::Zero();
  for (std::size_t i = 1; i < log.times.size(); ++i)
    integral += 0.5 * (log.times[i] - log.times[i - 1]) * (log.a[i] + log.a[i - 1]).tail<3>();
  Eigen::Vector3d expected = Eigen::Vector3d::Zero();
  for (const auto& t : tendons) expected += t.moment().cwiseQuotient(rod.stiffness.diagonal().tail<3>());
  EXPECT_LT((integral - expected).norm(), 1e-12 * expected.norm());
  for (const auto& a : log.a) EXPECT_TRUE(a.head<3>().isZero(0.0));

  std::vector<double> nodes;
  for (int k = 0; k <= 7; ++k) nodes.push_back(0.2 * k / 7);
  const std::vector<InputProfile> profiles = tensions_to_inputs(rod, tendons, nodes, 0.002);
  ASSERT_EQ(profiles.size(), 7u);
  Eigen::Vector3d from_profiles = Eigen::Vector3d::Zero();
  for (const auto& p : profiles)
    for (const auto& seg : p.segments()) from_profiles += 0.5 * seg.duration * (seg.a_start + seg.a_end).tail<3>();
  EXPECT_LT((from_profiles - expected).norm(), 1e-12 * expected.norm());
}

TEST(TensionsToInputs, ErrorsAndZeroTension) {
  const RodModel rod = test_rod();
  const std::vector<double> nodes{0.0, 0.1, 0.2};
  EXPECT_THROW(tensions_to_inputs(rod, {{5e-3, 0.0, 0.25, 1.0}}, nodes), GeometryError);
  EXPECT_THROW(tensions_to_inputs(rod, {{5e-3, 0.0, 0.0, 1.0}}, nodes), GeometryError);
  EXPECT_THROW(tensions_to_inputs(rod, {{5e-3, 0.0, 0.1, -1.0}}, nodes), GeometryError);
  EXPECT_THROW(tensions_to_inputs(rod, {}, {0.0, 0.1}), CoverageError);
  for (const auto& p : tensions_to_inputs(rod, {{5e-3, 0.0, 0.1, 0.0}}, nodes)) EXPECT_TRUE(p.is_zero());
  EXPECT_THROW(RodModel::circular(-1.0, 1e-3, 1e9, 0.3), GeometryError);
}

TEST(SimulateRod, StraightAndConstantCurvature) {
  const RodModel rod = test_rod();
  const RodShape straight = simulate_rod(rod, {});
  for (double s : rod.disk_arclengths)
    EXPECT_LT((straight.position_at(s) - Eigen::Vector3d(0, 0, s)).norm(), 1e-15);

  const TendonRoute t{8e-3, 0.0, 0.2, 1.0};
  const RodShape arc = simulate_rod(rod, {t});
  const double kappa = t.moment_magnitude().value / rod.stiffness(3, 3);
  for (double s : rod.disk_arclengths) {
    const Eigen::Vector3d p((1.0 - std::cos(kappa * s)) / kappa, 0.0, std::sin(kappa * s) / kappa);
    EXPECT_LT((arc.position_at(s) - p).norm(), 1e-10) << s;
  }
  EXPECT_THROW(arc.pose_at(0.013), DomainError);
}

TEST(SimulateRod, TipForceShootingSatisfiesStatics) {
  const RodModel rod = test_rod();
  const Eigen::Vector3d F(0.05, -0.03, 0.0);
  const RodShape shape = simulate_rod(rod, {{8e-3, 0.0, 0.1, 1.0}}, F);
  // No tendon ends at the tip, so the tip is moment free.
  const Twist tip = shape.strains.back();
  EXPECT_LT(tip.tail<3>().norm(), 1e-9);
}

TEST(EstimateShape, BaseAnchoredAndStraightRod) {
  const RodModel rod = test_rod();
  const RodShape truth = simulate_rod(rod, {});
  ShapeEstimatorSettings settings = ShapeEstimatorSettings::defaults();
  const ShapeEstimate est = estimate_shape(rod, {}, tip_of(truth, rod.length, true), settings);
  ASSERT_TRUE(est.solution.converged);
  EXPECT_TRUE(est.pose_at(0.0).matrix() == Pose::identity().matrix());
  for (double s : rod.disk_arclengths) EXPECT_LT((est.position_at(s) - Eigen::Vector3d(0, 0, s)).norm(), 1e-6);
}

TEST(EstimateShape, ZeroTensionMatchesNoInputEstimator) {
  const RodModel rod = test_rod();
  const RodShape truth = simulate_rod(rod, {}, Eigen::Vector3d(0.05, 0.02, 0.0));
  ShapeEstimatorSettings settings = ShapeEstimatorSettings::defaults();
  const std::vector<TendonRoute> slack{{8e-3, 0.0, 0.1, 0.0}};
  const ShapeEstimate a = estimate_shape(rod, slack, tip_of(truth, rod.length, false), settings);
  settings.use_inputs = false;
  const ShapeEstimate b = estimate_shape(rod, slack, tip_of(truth, rod.length, false), settings);
  for (double s : rod.disk_arclengths)
    EXPECT_LT((a.pose_at(s).matrix() - b.pose_at(s).matrix()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EstimateShape, PosteriorStrainIntegratesToTip) {
  const RodModel rod = test_rod();
  const std::vector<TendonRoute> tendons{{8e-3, 0.0, 0.2, 1.5}};
  const RodShape truth = simulate_rod(rod, tendons);
  ShapeEstimatorSettings settings = ShapeEstimatorSettings::defaults();
  settings.input_step = 2.5e-4;
  settings.node_count = 21;
  const ShapeEstimate est = estimate_shape(rod, tendons, tip_of(truth, rod.length, false), settings);
  ASSERT_TRUE(est.solution.converged);
  const Pose integrated = integrate_strain(est, rod.length, 2000);
  EXPECT_LT((integrated.position() - est.position_at(rod.length)).norm(), 1e-6);
  EXPECT_LT((integrated.position() - truth.position_at(rod.length)).norm(), 1e-6);
}

TEST(EstimateShape, BentRodTipPoseAccuracy) {
  const RodModel rod = test_rod();
  const std::vector<TendonRoute> tendons{{8e-3, 0.0, 0.1, 2.0}, {8e-3, std::numbers::pi / 2, 0.2, 1.0}};
  const RodShape truth = simulate_rod(rod, tendons);
  const ShapeEstimate est = estimate_shape(rod, tendons, tip_of(truth, rod.length, false),
                                           ShapeEstimatorSettings::defaults());
  ASSERT_TRUE(est.solution.converged);
  EXPECT_LT(shape_errors(rod, truth, est).position_rmse, 1e-3);
}

TEST(EstimateShape, InputsHelpWithTipPositionOnly) {
  const RodModel rod = test_rod();
  const std::vector<TendonRoute> tendons{{8e-3, 0.0, 0.1, 2.0}, {8e-3, std::numbers::pi, 0.2, 1.0}};
  const RodShape truth = simulate_rod(rod, tendons);
  ShapeEstimatorSettings settings = ShapeEstimatorSettings::defaults();
  const ShapeEstimate with = estimate_shape(rod, tendons, tip_of(truth, rod.length, true), settings);
  settings.use_inputs = false;
  const ShapeEstimate without = estimate_shape(rod, tendons, tip_of(truth, rod.length, true), settings);
  const double a = shape_errors(rod, truth, with).position_rmse;
  const double b = shape_errors(rod, truth, without).position_rmse;
  EXPECT_LT(a, b);
}
