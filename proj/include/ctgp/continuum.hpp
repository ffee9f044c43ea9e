#pragma once

#include <optional>
#include <vector>

#include "ctgp/inputs.hpp"
#include "ctgp/solver.hpp"

namespace ctgp {

namespace units {

/// Scalar tagged with exponents of length (m) and force (N).
template <int L, int F>
struct Quantity {
  double value = 0.0;
  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : value(v) {}

  constexpr Quantity operator+(Quantity o) const { return Quantity(value + o.value); }
  constexpr Quantity operator-(Quantity o) const { return Quantity(value - o.value); }
  constexpr Quantity operator*(double s) const { return Quantity(value * s); }
  constexpr Quantity operator/(double s) const { return Quantity(value / s); }
};

template <int L1, int F1, int L2, int F2>
constexpr Quantity<L1 + L2, F1 + F2> operator*(Quantity<L1, F1> a, Quantity<L2, F2> b) {
  return Quantity<L1 + L2, F1 + F2>(a.value * b.value);
}

template <int L1, int F1, int L2, int F2>
constexpr Quantity<L1 - L2, F1 - F2> operator/(Quantity<L1, F1> a, Quantity<L2, F2> b) {
  return Quantity<L1 - L2, F1 - F2>(a.value / b.value);
}

using Length = Quantity<1, 0>;
using Force = Quantity<0, 1>;
using Moment = Quantity<1, 1>;
using MomentDensity = Quantity<0, 1>;
using ForceDensity = Quantity<-1, 1>;
/// EI, GJ.
using BendingStiffness = Quantity<2, 1>;
/// EA, GA.
using AxialStiffness = Quantity<0, 1>;
/// Derivative of curvature along the arclength.
using CurvatureRate = Quantity<-2, 0>;
/// Derivative of stretch/shear along the arclength.
using StretchRate = Quantity<-1, 0>;

}  // namespace units

/// Elastic rod with body-frame stiffness diag(GA, GA, EA, EI, EI, GJ).
struct RodModel {
  double length = 0.0;
  Matrix6 stiffness = Matrix6::Identity();
  std::vector<double> disk_arclengths;

  /// Solid circular section.
  static RodModel circular(double length, double diameter, double youngs_modulus, double poisson_ratio,
                           std::vector<double> disk_arclengths = {});

  units::BendingStiffness bending_stiffness(int axis) const;
  units::AxialStiffness axial_stiffness(int axis) const;
  void validate() const;
};

struct TendonRoute {
  double offset_radius = 0.0;
  /// Angle of the routing plane about the backbone, from the body x-axis.
  double azimuth = 0.0;
  double termination_arclength = 0.0;
  double tension = 0.0;

  units::Moment moment_magnitude() const;
  /// Point moment at the termination in the body frame.
  Eigen::Vector3d moment() const;
};

/// Distributed actuation of the strain-derivative channel sampled at the
/// knots of a piecewise-linear profile over [0, length]: `a` holds K^{-1} f_in
/// in the estimator's sign convention, `v` the strain input (zero).
InputLog actuation_samples(const RodModel& rod, const std::vector<TendonRoute>& tendons, double input_step,
                           const std::vector<double>& extra_knots = {});

/// One profile per adjacent pair of node arclengths.
std::vector<InputProfile> tensions_to_inputs(const RodModel& rod, const std::vector<TendonRoute>& tendons,
                                             const std::vector<double>& node_arclengths, double input_step = 0.0);

/// Straight, unstretched rod strain in the estimator convention.
Twist straight_strain();

/// Quasi-static rod shape under the point-moment tendon model and a tip force
/// fixed in the world frame, base frame at the world origin.
struct RodShape {
  std::vector<double> arclengths;
  /// Estimator convention (body-from-world).
  std::vector<Pose> poses;
  /// Physical body-frame strain (v; u).
  std::vector<Twist> strains;

  Pose pose_at(double s) const;
  Eigen::Vector3d position_at(double s) const { return pose_at(s).position(); }
};

RodShape simulate_rod(const RodModel& rod, const std::vector<TendonRoute>& tendons,
                      const Eigen::Vector3d& tip_force = Eigen::Vector3d::Zero(), double max_step = 5e-4);

struct TipMeasurement {
  Pose pose;
  Matrix6 covariance = Matrix6::Identity();
  /// Only the tip position is used.
  bool position_only = false;
};

struct ShapeEstimatorSettings {
  PriorHyper hyper;
  int node_count = 11;
  bool use_inputs = true;
  /// Input discretization; zero selects length / 100.
  double input_step = 0.0;
  /// Prior on the strain at the free end, centred on the straight rod. The
  /// tip carries no moment under the point-moment model.
  Matrix6 tip_strain_covariance = Matrix6::Identity();
  SolverSettings solver;

  static ShapeEstimatorSettings defaults();
};

struct ShapeEstimate {
  Solution solution;
  double solve_seconds = 0.0;

  Pose pose_at(double s) const { return solution.query(s).pose; }
  Eigen::Vector3d position_at(double s) const { return pose_at(s).position(); }
  /// Physical body-frame strain.
  Twist strain_at(double s) const { return -solution.query(s).velocity; }
};

ShapeEstimate estimate_shape(const RodModel& rod, const std::vector<TendonRoute>& tendons,
                             const TipMeasurement& measurement, const ShapeEstimatorSettings& settings);

struct ShapeErrors {
  double position_rmse = 0.0;
  double position_max = 0.0;
  double rotation_rmse = 0.0;
  double rotation_max = 0.0;
};

/// Errors over the disk arclengths.
ShapeErrors shape_errors(const RodModel& rod, const RodShape& truth, const ShapeEstimate& estimate);

}  // namespace ctgp
