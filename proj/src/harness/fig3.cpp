#include <cmath>
#include <numbers>
#include <tuple>

#include "ctgp/harness.hpp"

namespace ctgp::harness {

namespace {

constexpr double kDuration = 3.0;
constexpr double kForward = 1.0;
constexpr std::array<double, 3> kArcYawRates{0.6, -1.2, 0.9};
constexpr double kSineAmplitude = 2.0;
constexpr int kSineSegments = 30;
constexpr double kSampleRate = 100.0;
constexpr double kMeasurementVariance = 1e-4;

PriorHyper fig3_hyper() { return PriorHyper::isotropic(1e-2, 1e-4); }

std::vector<InputProfile> velocity_profiles() {
  std::vector<InputProfile> out;
  for (double w : kArcYawRates) out.push_back(InputProfile::constant(1.0, drive_twist(kForward, w)));
  return out;
}

std::vector<InputProfile> acceleration_profiles() {
  InputLog log;
  const double omega = 2.0 * std::numbers::pi / kDuration;
  for (int i = 0; i <= kSineSegments; ++i) {
    const double t = kDuration * i / kSineSegments;
    log.times.push_back(t);
    log.v.push_back(drive_twist(kForward, 0.0));
    log.a.push_back(drive_twist(0.0, kSineAmplitude * std::sin(omega * t)));
  }
  std::vector<InputProfile> out;
  for (int k = 0; k < 3; ++k) out.push_back(from_samples(log, k, k + 1));
  return out;
}

Problem fig3_problem(const std::vector<InputProfile>& profiles) {
  Problem p;
  p.hyper = fig3_hyper();
  p.profiles = profiles;
  p.nodes.resize(4);
  for (int k = 0; k < 4; ++k) p.nodes[k].time = k;
  for (int k = 0; k < 3; ++k) {
    std::tie(p.nodes[k + 1].pose, p.nodes[k + 1].bias) =
        prior_mean_propagate(p.nodes[k].pose, p.nodes[k].bias, profiles[k], 1.0);
    p.nodes[k + 1].time = k + 1;
  }
  p.lock(0, true, true);
  return p;
}

std::vector<Fig3Sample> sample(const Solution& sol) {
  std::vector<Fig3Sample> out;
  const int n = static_cast<int>(std::lround(kDuration * kSampleRate));
  for (int i = 0; i <= n; ++i) {
    const double t = i / kSampleRate;
    const QueryResult q = sol.query(t, true);
    Fig3Sample s;
    s.time = t;
    s.position = q.pose.position();
    const Eigen::Matrix3d Rwb = q.pose.world_from_body();
    s.yaw = std::atan2(Rwb(1, 0), Rwb(0, 0));
    s.velocity = -q.velocity;
    const Eigen::Matrix3d P = Rwb * q.covariance->topLeftCorner<3, 3>() * Rwb.transpose();
    s.position_3sigma = 3.0 * P.diagonal().head<2>().cwiseMax(0.0).cwiseSqrt();
    out.push_back(s);
  }
  return out;
}

}  // namespace

Fig3Result reproduce_fig3(Fig3Variant variant) {
  Fig3Result r;
  r.variant = variant;
  r.profiles = variant == Fig3Variant::Velocity ? velocity_profiles() : acceleration_profiles();
  if (variant == Fig3Variant::Velocity) r.input_jumps = {1.0, 2.0};
  else r.sine_frequency = 2.0 * std::numbers::pi / kDuration;

  const Problem prior = fig3_problem(r.profiles);
  r.prior = solve(prior);

  // Same fixed offset from the prior end point in both variants.
  r.measured_position = r.prior.nodes.back().pose.position() + Eigen::Vector3d(-0.15, 0.2, 0.0);
  r.measurement_variance = kMeasurementVariance;
  Problem post = prior;
  post.add(std::make_shared<NodeFactor>(
      3, std::make_shared<PositionFactor>(r.measured_position, kMeasurementVariance * Eigen::Matrix3d::Identity())));
  r.posterior = solve(post);

  r.prior_samples = sample(r.prior);
  r.posterior_samples = sample(r.posterior);
  return r;
}

}  // namespace ctgp::harness
