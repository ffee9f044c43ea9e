#include "ctgp/continuum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <type_traits>

#include "ctgp/errors.hpp"

namespace ctgp {

namespace {

constexpr double kKnotTol = 1e-12;

// Integral over [lo, hi] of the unit-height triangle with half-width w centred at c.
double clipped_triangle_area(double c, double w, double lo, double hi) {
  auto F = [&](double s) {
    const double x = std::clamp((s - c) / w, -1.0, 1.0);
    return w * (x < 0.0 ? 0.5 * (1.0 + x) * (1.0 + x) : 1.0 - 0.5 * (1.0 - x) * (1.0 - x));
  };
  return F(hi) - F(lo);
}

void check_tendons(const RodModel& rod, const std::vector<TendonRoute>& tendons) {
  for (const auto& t : tendons) {
    if (!(t.termination_arclength > 0.0) || t.termination_arclength > rod.length * (1.0 + 1e-12))
      throw GeometryError("tendon termination outside the rod");
    if (!(t.tension >= 0.0) || !(t.offset_radius >= 0.0)) throw GeometryError("tendon tension and offset must be >= 0");
  }
}

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > kKnotTol) out.push_back(x);
  return out;
}

struct RodState {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
};

struct RodDerivative {
  Eigen::Matrix3d R;
  Eigen::Vector3d p;
  Eigen::Vector3d m;
};

struct RodStatics {
  Eigen::Vector3d k_shear;
  Eigen::Vector3d k_bend;
  Eigen::Vector3d n;

  Twist strain(const RodState& x) const {
    Twist e;
    e.head<3>() = Eigen::Vector3d::UnitZ() + (x.R.transpose() * n).cwiseQuotient(k_shear);
    e.tail<3>() = (x.R.transpose() * x.m).cwiseQuotient(k_bend);
    return e;
  }

  RodDerivative operator()(const RodState& x) const {
    const Twist e = strain(x);
    RodDerivative d;
    d.R = x.R * skew(e.tail<3>());
    d.p = x.R * e.head<3>();
    d.m = -d.p.cross(n);
    return d;
  }
};

RodState advance(const RodState& x, const RodDerivative& d, double h) {
  return {x.R + h * d.R, x.p + h * d.p, x.m + h * d.m};
}

RodState rk4(const RodStatics& f, const RodState& x, double h) {
  const RodDerivative k1 = f(x);
  const RodDerivative k2 = f(advance(x, k1, 0.5 * h));
  const RodDerivative k3 = f(advance(x, k2, 0.5 * h));
  const RodDerivative k4 = f(advance(x, k3, h));
  RodState y;
  y.R = x.R + h / 6.0 * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
  y.p = x.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
  y.m = x.m + h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(y.R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  y.R = svd.matrixU() * svd.matrixV().transpose();
  return y;
}

}  // namespace

RodModel RodModel::circular(double length, double diameter, double youngs_modulus, double poisson_ratio,
                            std::vector<double> disk_arclengths) {
  if (!(diameter > 0.0) || !(youngs_modulus > 0.0) || !(poisson_ratio > -1.0))
    throw GeometryError("invalid rod section");
  const double A = std::numbers::pi * diameter * diameter / 4.0;
  const double I = std::numbers::pi * std::pow(diameter, 4) / 64.0;
  const double G = youngs_modulus / (2.0 * (1.0 + poisson_ratio));
  RodModel rod;
  rod.length = length;
  rod.stiffness = (Vector6() << G * A, G * A, youngs_modulus * A, youngs_modulus * I, youngs_modulus * I, 2.0 * G * I)
                      .finished()
                      .asDiagonal();
  rod.disk_arclengths = std::move(disk_arclengths);
  rod.validate();
  return rod;
}

units::BendingStiffness RodModel::bending_stiffness(int axis) const {
  return units::BendingStiffness(stiffness(3 + axis, 3 + axis));
}

units::AxialStiffness RodModel::axial_stiffness(int axis) const { return units::AxialStiffness(stiffness(axis, axis)); }

void RodModel::validate() const {
  if (!(length > 0.0)) throw GeometryError("rod length must be positive");
  if (!(stiffness.diagonal().array() > 0.0).all() ||
      (stiffness - Matrix6(stiffness.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 0.0)
    throw GeometryError("rod stiffness must be diagonal with positive entries");
  for (double s : disk_arclengths)
    if (s < 0.0 || s > length * (1.0 + 1e-12)) throw GeometryError("disk outside the rod");
}

units::Moment TendonRoute::moment_magnitude() const { return units::Force(tension) * units::Length(offset_radius); }

Eigen::Vector3d TendonRoute::moment() const {
  return moment_magnitude().value * Eigen::Vector3d(-std::sin(azimuth), std::cos(azimuth), 0.0);
}

InputLog actuation_samples(const RodModel& rod, const std::vector<TendonRoute>& tendons, double input_step,
                           const std::vector<double>& extra_knots) {
  rod.validate();
  check_tendons(rod, tendons);
  if (!(input_step > 0.0)) throw DomainError("input step must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil(rod.length / input_step - 1e-9)));
  const double h = rod.length / n;
  const double w = 0.5 * h;

  std::vector<double> knots;
  for (int i = 0; i <= n; ++i) knots.push_back(rod.length * i / n);
  for (const auto& t : tendons)
    for (double s : {t.termination_arclength - w, t.termination_arclength, t.termination_arclength + w})
      if (s > 0.0 && s < rod.length) knots.push_back(s);
  for (double s : extra_knots)
    if (s > 0.0 && s < rod.length) knots.push_back(s);
  knots = unique_sorted(std::move(knots));

  struct Bump {
    double centre;
    double height;
    Eigen::Vector3d moment;
  };
  std::vector<Bump> bumps;
  for (const auto& t : tendons) {
    if (t.moment_magnitude().value == 0.0) continue;
    const double c = std::min(t.termination_arclength, rod.length);
    bumps.push_back({c, 1.0 / clipped_triangle_area(c, w, 0.0, rod.length), t.moment()});
  }

  InputLog log;
  for (double s : knots) {
    Twist a = Twist::Zero();
    for (const auto& b : bumps) {
      const double shape = std::max(0.0, 1.0 - std::abs(s - b.centre) / w) * b.height;
      for (int i = 0; i < 3; ++i) {
        const units::MomentDensity density = units::Moment(b.moment(i)) / units::Length(1.0 / shape);
        const auto rate = density / rod.bending_stiffness(i);
        static_assert(std::is_same_v<std::remove_const_t<decltype(rate)>, units::CurvatureRate>);
        a(3 + i) += rate.value;
      }
    }
    log.times.push_back(s);
    log.v.push_back(Twist::Zero());
    log.a.push_back(a);
  }
  return log;
}

std::vector<InputProfile> tensions_to_inputs(const RodModel& rod, const std::vector<TendonRoute>& tendons,
                                             const std::vector<double>& node_arclengths, double input_step) {
  rod.validate();
  check_tendons(rod, tendons);
  const double tol = 1e-9 * rod.length;
  if (node_arclengths.size() < 2 || std::abs(node_arclengths.front()) > tol ||
      std::abs(node_arclengths.back() - rod.length) > tol)
    throw CoverageError("node arclengths must cover the whole rod");
  for (std::size_t k = 1; k < node_arclengths.size(); ++k)
    if (!(node_arclengths[k] > node_arclengths[k - 1])) throw WiringError("node arclengths must increase");

  std::vector<InputProfile> out;
  const bool actuated = std::any_of(tendons.begin(), tendons.end(),
                                    [](const TendonRoute& t) { return t.moment_magnitude().value > 0.0; });
  if (!actuated) {
    for (std::size_t k = 0; k + 1 < node_arclengths.size(); ++k)
      out.push_back(InputProfile::zero(node_arclengths[k + 1] - node_arclengths[k]));
    return out;
  }
  const double step = input_step > 0.0 ? input_step : rod.length / 100.0;
  const InputLog log = actuation_samples(rod, tendons, step, node_arclengths);
  for (std::size_t k = 0; k + 1 < node_arclengths.size(); ++k)
    out.push_back(from_samples(log, node_arclengths[k], node_arclengths[k + 1]));
  return out;
}

Twist straight_strain() {
  Twist e = Twist::Zero();
  e(2) = -1.0;
  return e;
}

Pose RodShape::pose_at(double s) const {
  const auto it = std::lower_bound(arclengths.begin(), arclengths.end(), s - 1e-9);
  if (it == arclengths.end() || std::abs(*it - s) > 1e-9) throw DomainError("arclength is not a simulated knot");
  return poses[static_cast<std::size_t>(it - arclengths.begin())];
}

RodShape simulate_rod(const RodModel& rod, const std::vector<TendonRoute>& tendons, const Eigen::Vector3d& tip_force,
                      double max_step) {
  rod.validate();
  check_tendons(rod, tendons);
  std::vector<double> knots{0.0, rod.length};
  for (double s : rod.disk_arclengths) knots.push_back(s);
  for (const auto& t : tendons) knots.push_back(std::min(t.termination_arclength, rod.length));
  knots = unique_sorted(std::move(knots));

  const RodStatics f{rod.stiffness.diagonal().head<3>(), rod.stiffness.diagonal().tail<3>(), tip_force};

  auto shoot = [&](const Eigen::Vector3d& m0, RodShape* shape) {
    RodState x;
    x.m = m0;
    auto record = [&](double s) {
      if (!shape) return;
      shape->arclengths.push_back(s);
      shape->poses.push_back(Pose::from_world(x.R, x.p));
      shape->strains.push_back(f.strain(x));
    };
    auto release = [&](double s) {
      for (const auto& t : tendons)
        if (std::abs(std::min(t.termination_arclength, rod.length) - s) <= kKnotTol) x.m -= x.R * t.moment();
    };
    record(0.0);
    for (std::size_t i = 1; i < knots.size(); ++i) {
      const double span = knots[i] - knots[i - 1];
      const int steps = std::max(1, static_cast<int>(std::ceil(span / max_step)));
      for (int j = 0; j < steps; ++j) x = rk4(f, x, span / steps);
      // Strain just proximal to a termination is recorded, then the tendon releases.
      record(knots[i]);
      release(knots[i]);
    }
    return x.m;
  };

  Eigen::Vector3d m0 = Eigen::Vector3d::Zero();
  for (const auto& t : tendons) m0 += t.moment();
  m0 += (rod.length * Eigen::Vector3d::UnitZ()).cross(tip_force);
  const double scale = std::max(m0.norm(), 1e-6);
  for (int it = 0;; ++it) {
    const Eigen::Vector3d r = shoot(m0, nullptr);
    if (r.norm() < 1e-13 * scale) break;
    if (it == 50) throw IllConditionedError("rod shooting did not converge");
    Eigen::Matrix3d J;
    const double h = 1e-7 * scale;
    for (int j = 0; j < 3; ++j) {
      Eigen::Vector3d d = Eigen::Vector3d::Zero();
      d(j) = h;
      J.col(j) = (shoot(m0 + d, nullptr) - shoot(m0 - d, nullptr)) / (2.0 * h);
    }
    m0 -= J.lu().solve(r);
  }
  RodShape shape;
  shoot(m0, &shape);
  return shape;
}

ShapeEstimatorSettings ShapeEstimatorSettings::defaults() {
  ShapeEstimatorSettings s;
  s.hyper = PriorHyper::isotropic(1e-2, 1e3);
  s.tip_strain_covariance = (Vector6() << 1e-6, 1e-6, 1e-6, 10.0, 10.0, 10.0).finished().asDiagonal();
  return s;
}

ShapeEstimate estimate_shape(const RodModel& rod, const std::vector<TendonRoute>& tendons,
                             const TipMeasurement& measurement, const ShapeEstimatorSettings& settings) {
  rod.validate();
  check_tendons(rod, tendons);
  if (settings.node_count < 2) throw DomainError("shape estimation needs at least two nodes");
  const int N = settings.node_count;
  std::vector<double> s(N);
  for (int k = 0; k < N; ++k) s[k] = rod.length * k / (N - 1);
  s.back() = rod.length;

  Problem p;
  p.hyper = settings.hyper;
  p.settings = settings.solver;
  if (settings.use_inputs) {
    p.profiles = tensions_to_inputs(rod, tendons, s, settings.input_step);
  } else {
    for (int k = 0; k + 1 < N; ++k) p.profiles.push_back(InputProfile::zero(s[k + 1] - s[k]));
  }
  p.nodes.push_back({0.0, Pose::identity(), straight_strain()});
  for (int k = 1; k < N; ++k) {
    const StateNode& prev = p.nodes.back();
    const auto [T, b] = prior_mean_propagate(prev.pose, prev.bias, p.profiles[k - 1], s[k] - s[k - 1]);
    p.nodes.push_back({s[k], T, b});
  }
  p.lock(0, true, false);
  const std::array<bool, 6> all{true, true, true, true, true, true};
  p.add(std::make_shared<NodeFactor>(
      N - 1, std::make_shared<VelocityFactor>(straight_strain(), settings.tip_strain_covariance, all)));
  if (measurement.position_only) {
    p.add(std::make_shared<NodeFactor>(
        N - 1, std::make_shared<PositionFactor>(measurement.pose.position(),
                                                Eigen::Matrix3d(measurement.covariance.topLeftCorner<3, 3>()))));
  } else {
    p.add(std::make_shared<NodeFactor>(N - 1, std::make_shared<PoseFactor>(measurement.pose, measurement.covariance)));
  }

  ShapeEstimate out;
  const auto t0 = std::chrono::steady_clock::now();
  out.solution = solve(p);
  out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ShapeErrors shape_errors(const RodModel& rod, const RodShape& truth, const ShapeEstimate& estimate) {
  if (rod.disk_arclengths.empty()) throw DomainError("rod has no disks to compare");
  ShapeErrors e;
  for (double s : rod.disk_arclengths) {
    const Pose gt = truth.pose_at(s);
    const Pose est = estimate.pose_at(s);
    const double dp = (gt.position() - est.position()).norm();
    const double dr = so3::angle(gt.world_from_body() * est.world_from_body().transpose());
    e.position_rmse += dp * dp;
    e.rotation_rmse += dr * dr;
    e.position_max = std::max(e.position_max, dp);
    e.rotation_max = std::max(e.rotation_max, dr);
  }
  const double n = static_cast<double>(rod.disk_arclengths.size());
  e.position_rmse = std::sqrt(e.position_rmse / n);
  e.rotation_rmse = std::sqrt(e.rotation_rmse / n);
  return e;
}

}  // namespace ctgp
