#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ctgp/errors.hpp"
#include "ctgp/harness.hpp"

using namespace ctgp;
using namespace ctgp::harness;

namespace {

const std::string kMinimal = R"(
schema_version: 1
domain: mobile
seed: 3
script:
  duration: 20.0
  segments:
    - {duration: 4.0, forward: 0.5, yaw: 0.0}
    - {duration: 4.0, forward: 0.5, yaw: 0.2}
    - {duration: 2.0, forward: [0.5, 0.0], yaw: [0.2, 0.0]}
    - {duration: 2.0, forward: 0.0, yaw: 0.3}
    - {duration: 2.0, forward: [0.0, 0.5], yaw: 0.0, yaw_sine: {amplitude: 0.2, period: 2.0}}
landmarks: [[-3, -3, 1], [6, -3, 1], [6, 6, 1], [-3, 6, 1], [1, 2, 0.5]]
odometry: {rate: 10.0, white_std: [0.0, 0.0], bias_psd: [0.0, 0.0]}
ranges: {dt_landmark: 1.0, variance: 1.0e-8}
evaluation: {rate: 10.0, offset: 0.05}
)";

MobileConfig minimal() { return parse_scenario(kMinimal).mobile; }

MobileConfig constant_drive(double forward, double yaw, double duration) {
  MobileConfig c = minimal();
  c.script.segments = {{duration, forward, forward, yaw, yaw, 0.0, 0.0}};
  c.script.duration = duration;
  return c;
}

std::string scenario(const std::string& name) { return std::string(CTGP_SCENARIO_DIR) + "/" + name; }

}  // namespace

TEST(Config, ParsesMinimalScenario) {
  const ScenarioConfig s = parse_scenario(kMinimal);
  EXPECT_EQ(s.domain, "mobile");
  EXPECT_EQ(s.mobile.seed, 3u);
  EXPECT_EQ(s.mobile.script.segments.size(), 5u);
  EXPECT_DOUBLE_EQ(s.mobile.script.segments[2].forward_start, 0.5);
  EXPECT_DOUBLE_EQ(s.mobile.script.segments[2].forward_end, 0.0);
  EXPECT_DOUBLE_EQ(s.mobile.script.segments[4].yaw_sine_period, 2.0);
  EXPECT_EQ(s.mobile.landmarks.size(), 5u);
  EXPECT_DOUBLE_EQ(s.mobile.landmarks[4].z(), 0.5);
}

TEST(Config, RejectsSchemaViolations) {
  EXPECT_THROW(parse_scenario("domain: mobile\n"), ConfigError);
  EXPECT_THROW(parse_scenario("schema_version: 2\ndomain: mobile\n"), ConfigError);
  EXPECT_THROW(parse_scenario("schema_version: 1\ndomain: boat\n"), ConfigError);
  EXPECT_THROW(parse_scenario("schema_version: [1\n"), ConfigError);
  std::string bad_rate = kMinimal;
  bad_rate.replace(bad_rate.find("dt_landmark: 1.0"), 16, "dt_landmark: 0.0");
  EXPECT_THROW(parse_scenario(bad_rate), ConfigError);
  std::string bad_method = kMinimal + "estimator: {method: spline}\n";
  EXPECT_THROW(parse_scenario(bad_method), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.yaml"), ConfigError);
}

TEST(Config, BundledScenariosLoad) {
  const MobileConfig twisty = load_scenario(scenario("mobile_twisty.yaml")).mobile;
  EXPECT_DOUBLE_EQ(twisty.inputs_qc[0], 1.77e-5);
  EXPECT_DOUBLE_EQ(twisty.inputs_qc[1], 3.50e-5);
  EXPECT_DOUBLE_EQ(twisty.wnoa_qc[0], 2.11e-3);
  EXPECT_DOUBLE_EQ(twisty.wnoa_qc[1], 3.94e-2);
  EXPECT_DOUBLE_EQ(twisty.range_variance, 9.0e-4);
  EXPECT_DOUBLE_EQ(twisty.velocity_variance[0], 5.45e-4);
  EXPECT_DOUBLE_EQ(twisty.velocity_variance[1], 1.01e-3);
  EXPECT_EQ(twisty.landmarks.size(), 17u);
  EXPECT_NO_THROW(load_scenario(scenario("mobile_consistency.yaml")));

  const ContinuumConfig rod = load_scenario(scenario("continuum.yaml")).continuum;
  EXPECT_EQ(rod.configurations.size(), 9u);
  EXPECT_DOUBLE_EQ(rod.qc(0), 1e-2);
  EXPECT_DOUBLE_EQ(rod.qc(5), 1e3);
  EXPECT_DOUBLE_EQ(rod.pose_variance(0), 4e-7);
  EXPECT_DOUBLE_EQ(rod.pose_variance(3), 2.5e-4);
}

TEST(DriveScript, RampsSineAndCycling) {
  const MobileConfig c = minimal();
  EXPECT_DOUBLE_EQ(c.script.evaluate(9.0)[0], 0.25);
  EXPECT_DOUBLE_EQ(c.script.evaluate(9.0)[1], 0.1);
  EXPECT_NEAR(c.script.evaluate(12.5)[1], 0.2, 1e-12);
  EXPECT_NEAR(c.script.evaluate(14.0 + 1.0)[0], c.script.evaluate(1.0)[0], 1e-12);
}

TEST(Simulate, ZeroInputsStationary) {
  MobileConfig c = constant_drive(0.0, 0.0, 5.0);
  c.range_variance = 1e-30;
  const MobileDataset d = simulate(c);
  for (const auto& s : d.truth.states) EXPECT_EQ(s, d.truth.states.front());
  for (const auto& r : d.ranges) {
    const auto& first = *std::find_if(d.ranges.begin(), d.ranges.end(),
                                      [&](const RangeMeasurement& m) { return m.landmark == r.landmark; });
    EXPECT_NEAR(r.range, first.range, 1e-12);
  }
}

TEST(Simulate, ConstantTwistIsCircleOfRadiusTwo) {
  const MobileDataset d = simulate(constant_drive(1.0, 0.5, 20.0));
  for (double t : {0.0, 1.234, 5.0, 12.345, 20.0}) {
    const auto s = d.truth.state_at(t);
    EXPECT_NEAR(s[0], 2.0 * std::sin(0.5 * t), 1e-6) << t;
    EXPECT_NEAR(s[1], 2.0 * (1.0 - std::cos(0.5 * t)), 1e-6) << t;
    EXPECT_NEAR(std::hypot(s[0], s[1] - 2.0), 2.0, 1e-6);
  }
}

TEST(Simulate, SameSeedIsBitIdentical) {
  MobileConfig c = minimal();
  c.odometry_white_std = {0.02, 0.03};
  c.odometry_bias_psd = {1e-4, 1e-4};
  c.range_variance = 1e-3;
  const MobileDataset a = simulate(c);
  const MobileDataset b = simulate(c);
  ASSERT_EQ(a.ranges.size(), b.ranges.size());
  for (std::size_t i = 0; i < a.ranges.size(); ++i) EXPECT_EQ(a.ranges[i].range, b.ranges[i].range);
  for (std::size_t i = 0; i < a.odometry.v.size(); ++i) EXPECT_TRUE(a.odometry.v[i] == b.odometry.v[i]);
  c.seed += 1;
  EXPECT_NE(simulate(c).ranges.front().range, a.ranges.front().range);
}

TEST(Simulate, OdometryStreamIndependentOfRangeSchedule) {
  MobileConfig c = minimal();
  c.odometry_white_std = {0.02, 0.03};
  const MobileDataset a = simulate(c);
  c.dt_landmark = 2.5;
  const MobileDataset b = simulate(c);
  for (std::size_t i = 0; i < a.odometry.v.size(); ++i) EXPECT_TRUE(a.odometry.v[i] == b.odometry.v[i]);
}

TEST(RunExperiment, NoiseFreeIsAccurate) {
  for (Method m : {Method::Inputs, Method::Wnoa})
    for (NodePolicy p : {NodePolicy::EveryInputTick, NodePolicy::MeasurementTimesOnly}) {
      MobileConfig c = minimal();
      c.method = m;
      c.nodes = p;
      if (m == Method::Wnoa) c.velocity_variance = {1e-8, 1e-8};
      const ExperimentResult r = run_experiment(c);
      EXPECT_TRUE(r.metrics.converged);
      if (m == Method::Inputs) EXPECT_LT(r.metrics.position_rmse, 1e-3) << to_string(p);
      EXPECT_LE(r.metrics.position_rmse, r.metrics.position_max);
      EXPECT_LE(r.metrics.rotation_rmse, r.metrics.rotation_max);
    }
}

TEST(RunExperiment, EvaluationUsesInterpolation) {
  MobileConfig c = minimal();
  c.nodes = NodePolicy::MeasurementTimesOnly;
  const ExperimentResult r = run_experiment(c);
  EXPECT_EQ(r.trajectory.size(), 200u);
  const std::set<double> nodes(r.node_times.begin(), r.node_times.end());
  for (const auto& row : r.trajectory)
    for (double t : nodes) EXPECT_GT(std::abs(row.time - t), 1e-6);
}

TEST(RunExperiment, CsvIsDeterministic) {
  MobileConfig c = minimal();
  c.odometry_white_std = {0.02, 0.03};
  c.range_variance = 1e-3;
  std::ostringstream a, b;
  write_trajectory_csv(a, run_experiment(c).trajectory);
  write_trajectory_csv(b, run_experiment(c).trajectory);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream lines(a.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 32);
}

TEST(Sweep, OneRowPerSetting) {
  MobileConfig c = minimal();
  c.nodes = NodePolicy::MeasurementTimesOnly;
  const std::vector<double> dts{0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  const auto rows = sweep(c, dts, {Method::Inputs, Method::Wnoa});
  ASSERT_EQ(rows.size(), 12u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_DOUBLE_EQ(rows[i].dt_landmark, dts[i % 6]);
    EXPECT_EQ(rows[i].method, i < 6 ? Method::Inputs : Method::Wnoa);
  }
  std::ostringstream out;
  write_metrics_header(out);
  for (const auto& r : rows) write_metrics_row(out, "t", r.method, r.nodes, r.dt_landmark, 1, r.metrics);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
}

TEST(Fig3, VelocityVariantKeepsJumps) {
  const Fig3Result r = reproduce_fig3(Fig3Variant::Velocity);
  ASSERT_EQ(r.input_jumps.size(), 2u);
  EXPECT_EQ(r.prior_samples.size(), 301u);
  for (double t : r.input_jumps) {
    const Twist jump = r.posterior.query(t + 1e-9).velocity - r.posterior.query(t - 1e-9).velocity;
    const Twist input = r.profiles[static_cast<std::size_t>(t)].evaluate(0.0).v -
                        r.profiles[static_cast<std::size_t>(t) - 1].evaluate(1.0).v;
    EXPECT_LT((jump - input).norm(), 1e-6);
  }
  const Eigen::Vector3d end = r.posterior.query(3.0).pose.position();
  EXPECT_LT((end - r.measured_position).norm(), 3.0 * std::sqrt(r.measurement_variance));
}

TEST(Continuum, FourRowsPerConfiguration) {
  ContinuumConfig c = load_scenario(scenario("continuum.yaml")).continuum;
  c.configurations.resize(2);
  const auto rows = run_continuum(c);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.errors.position_rmse, r.errors.position_max);
  }
  std::ostringstream out;
  write_continuum_csv(out, rows);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
}
