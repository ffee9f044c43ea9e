#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctgp/continuum.hpp"
#include "ctgp/solver.hpp"

namespace ctgp::harness {

constexpr int kSchemaVersion = 1;

enum class Method { Inputs, Wnoa };
enum class NodePolicy { EveryInputTick, MeasurementTimesOnly };

Method parse_method(const std::string& s);
NodePolicy parse_node_policy(const std::string& s);
std::string to_string(Method m);
std::string to_string(NodePolicy p);

/// Piece of the ground-truth drive script. Forward speed and yaw rate ramp
/// linearly from start to end; an optional sinusoid is added to the yaw rate.
struct ScriptSegment {
  double duration = 0.0;
  double forward_start = 0.0;
  double forward_end = 0.0;
  double yaw_start = 0.0;
  double yaw_end = 0.0;
  double yaw_sine_amplitude = 0.0;
  double yaw_sine_period = 0.0;
};

struct DriveScript {
  std::vector<ScriptSegment> segments;
  /// Total length; the segment list is cycled until it is reached.
  double duration = 0.0;

  /// Forward speed and yaw rate at t.
  std::array<double, 2> evaluate(double t) const;
};

struct MobileConfig {
  std::string name = "mobile";
  DriveScript script;
  std::array<double, 3> initial_pose{0.0, 0.0, 0.0};  // x, y, yaw
  std::vector<Eigen::Vector3d> landmarks;

  double odometry_rate = 10.0;
  std::array<double, 2> odometry_white_std{0.0, 0.0};
  /// Odometry drifts from the true velocity by a random walk with this intensity.
  std::array<double, 2> odometry_bias_psd{0.0, 0.0};

  double dt_landmark = 1.0;
  double range_variance = 9.0e-4;
  double max_range = 1e9;
  /// Planar error of the landmark map given to the estimator.
  double landmark_position_std = 0.0;

  Method method = Method::Inputs;
  NodePolicy nodes = NodePolicy::EveryInputTick;
  std::array<double, 2> inputs_qc{1.77e-5, 3.50e-5};
  std::array<double, 2> wnoa_qc{2.11e-3, 3.94e-2};
  std::array<double, 2> velocity_variance{5.45e-4, 1.01e-3};
  std::array<double, 2> initial_velocity_variance{1e-4, 1e-4};

  double eval_rate = 10.0;
  double eval_offset = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ContinuumConfiguration {
  std::vector<double> tensions;
  Eigen::Vector3d tip_force = Eigen::Vector3d::Zero();
};

struct ContinuumConfig {
  std::string name = "continuum";
  RodModel rod;
  /// Routes with zero tension; tensions come from each configuration.
  std::vector<TendonRoute> tendons;
  std::vector<ContinuumConfiguration> configurations;
  Vector6 qc = (Vector6() << 1e-2, 1e-2, 1e-2, 1e3, 1e3, 1e3).finished();
  Vector6 pose_variance = (Vector6() << 4e-7, 4e-7, 4e-7, 2.5e-4, 2.5e-4, 2.5e-4).finished();
  Vector6 tip_strain_variance = (Vector6() << 1e-6, 1e-6, 1e-6, 10.0, 10.0, 10.0).finished();
  int node_count = 11;
  double input_step = 0.0;
  bool measurement_noise = true;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ScenarioConfig {
  std::string domain;
  MobileConfig mobile;
  ContinuumConfig continuum;
};

/// Reads a versioned scenario file. Throws ConfigError on schema violations.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& yaml_text);

/// Planar ground truth sampled on a fixed grid.
struct PlanarTruth {
  double step = 0.01;
  std::vector<std::array<double, 3>> states;  // x, y, yaw
  DriveScript script;

  std::array<double, 3> state_at(double t) const;
  Pose pose_at(double t) const;
  double end_time() const { return step * static_cast<double>(states.size() - 1); }
};

struct RangeMeasurement {
  double time = 0.0;
  std::size_t landmark = 0;
  double range = 0.0;
};

struct MobileDataset {
  PlanarTruth truth;
  /// Odometry in estimator twist convention.
  InputLog odometry;
  std::vector<RangeMeasurement> ranges;
  /// Landmark map used by the estimator.
  std::vector<Eigen::Vector3d> surveyed_landmarks;
};

/// Integrates the drive script (RK4, step 1e-4) and samples noisy odometry and ranges.
MobileDataset simulate(const MobileConfig& config);

/// Estimator twist for a forward speed and yaw rate.
Twist drive_twist(double forward, double yaw_rate);
Pose planar_pose(double x, double y, double yaw);

struct Metrics {
  double position_rmse = 0.0;
  double position_max = 0.0;
  double rotation_rmse = 0.0;
  double rotation_max = 0.0;
  double solve_seconds = 0.0;
  int iterations = 0;
  std::size_t node_count = 0;
  bool converged = false;
  /// Mean planar (x, y, yaw) NEES over the evaluation times.
  double mean_nees = 0.0;
  /// Root mean of the predicted planar position variance.
  double predicted_position_std = 0.0;
};

struct TrajectoryRow {
  double time = 0.0;
  Pose truth;
  Pose estimate;
  /// Physical body velocity.
  Twist velocity = Twist::Zero();
  Vector12 covariance_diagonal = Vector12::Zero();
};

struct ExperimentResult {
  Metrics metrics;
  std::vector<TrajectoryRow> trajectory;
  std::vector<double> node_times;
};

/// Builds the estimation problem per method and node policy, solves it and
/// evaluates the interpolated posterior against ground truth.
ExperimentResult run_experiment(const MobileConfig& config, const MobileDataset& data);
ExperimentResult run_experiment(const MobileConfig& config);

struct SweepRow {
  Method method;
  NodePolicy nodes;
  double dt_landmark;
  Metrics metrics;
};

/// One run per (method, landmark interval), executed concurrently.
std::vector<SweepRow> sweep(const MobileConfig& config, const std::vector<double>& dt_landmarks,
                            const std::vector<Method>& methods);

enum class Fig3Variant { Velocity, Acceleration };

struct Fig3Sample {
  double time = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
  Twist velocity = Twist::Zero();
  /// Three-sigma planar position envelope (x, y).
  Eigen::Vector2d position_3sigma = Eigen::Vector2d::Zero();
};

struct Fig3Result {
  Fig3Variant variant;
  std::vector<InputProfile> profiles;
  Solution prior;
  Solution posterior;
  Eigen::Vector3d measured_position = Eigen::Vector3d::Zero();
  double measurement_variance = 0.0;
  std::vector<Fig3Sample> prior_samples;
  std::vector<Fig3Sample> posterior_samples;
  /// Arc boundaries of the velocity variant.
  std::vector<double> input_jumps;
  /// Angular frequency and amplitude of the acceleration variant.
  double sine_frequency = 0.0;
};

Fig3Result reproduce_fig3(Fig3Variant variant);

struct ContinuumRow {
  std::size_t configuration = 0;
  bool position_only = false;
  bool use_inputs = false;
  ShapeErrors errors;
  double solve_seconds = 0.0;
  bool converged = false;
};

std::vector<ContinuumRow> run_continuum(const ContinuumConfig& config);

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const std::string& scenario, Method method, NodePolicy nodes,
                       double dt_landmark, std::uint64_t seed, const Metrics& m);
void write_fig3_csv(std::ostream& out, const std::vector<Fig3Sample>& samples);
void write_continuum_csv(std::ostream& out, const std::vector<ContinuumRow>& rows);
void write_dataset(const std::string& directory, const MobileDataset& data, const MobileConfig& config);

}  // namespace ctgp::harness
