#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <tuple>

#include "ctgp/errors.hpp"
#include "ctgp/harness.hpp"

namespace ctgp::harness {

namespace {

constexpr double kTruthStep = 1e-4;
constexpr double kTimeTol = 1e-9;
constexpr std::array<bool, 6> kPlanarVelocity{true, false, false, false, false, true};

using State = std::array<double, 3>;

State unicycle(const State& s, const std::array<double, 2>& u) {
  return {u[0] * std::cos(s[2]), u[0] * std::sin(s[2]), u[1]};
}

State rk4(const DriveScript& script, const State& s, double t, double h) {
  auto add = [](const State& a, const State& b, double k) {
    return State{a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]};
  };
  const auto um = script.evaluate(t + 0.5 * h);
  const State k1 = unicycle(s, script.evaluate(t));
  const State k2 = unicycle(add(s, k1, 0.5 * h), um);
  const State k3 = unicycle(add(s, k2, 0.5 * h), um);
  const State k4 = unicycle(add(s, k3, h), script.evaluate(t + h));
  State out;
  for (int i = 0; i < 3; ++i) out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

State integrate(const DriveScript& script, State s, double t0, double t1) {
  const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / kTruthStep - kTimeTol)));
  const double h = (t1 - t0) / n;
  for (int i = 0; i < n; ++i) s = rk4(script, s, t0 + i * h, h);
  return s;
}

std::vector<double> schedule(double period, double end) {
  std::vector<double> t;
  for (std::size_t j = 0;; ++j) {
    const double tj = static_cast<double>(j) * period;
    if (tj > end + kTimeTol) break;
    t.push_back(std::min(tj, end));
  }
  return t;
}

Matrix6 planar_velocity_covariance(const std::array<double, 2>& var) {
  Vector6 d = Vector6::Ones();
  d(0) = var[0];
  d(5) = var[1];
  return d.asDiagonal();
}

// Node index when t falls on a node, otherwise the interval and local time.
struct Placement {
  bool at_node;
  std::size_t index;
  double tau;
};

Placement place(const std::vector<double>& node_times, double t) {
  auto it = std::lower_bound(node_times.begin(), node_times.end(), t - kTimeTol);
  if (it != node_times.end() && std::abs(*it - t) <= kTimeTol)
    return {true, static_cast<std::size_t>(it - node_times.begin()), 0.0};
  const std::size_t k = static_cast<std::size_t>(it - node_times.begin()) - 1;
  return {false, k, t};
}

void attach(Problem& p, const std::vector<double>& node_times, double t, std::shared_ptr<const UnaryFactor> f) {
  const Placement at = place(node_times, t);
  if (at.at_node)
    p.add(std::make_shared<NodeFactor>(at.index, std::move(f)));
  else
    p.add(std::make_shared<InterpolatedFactor>(at.index, at.tau, std::move(f)));
}

Twist odometry_at(const InputLog& log, double t) {
  auto it = std::upper_bound(log.times.begin(), log.times.end(), t);
  if (it == log.times.begin()) return log.v.front();
  if (it == log.times.end()) return log.v.back();
  const std::size_t i = static_cast<std::size_t>(it - log.times.begin());
  const double w = (t - log.times[i - 1]) / (log.times[i] - log.times[i - 1]);
  return (1.0 - w) * log.v[i - 1] + w * log.v[i];
}

}  // namespace

std::array<double, 2> DriveScript::evaluate(double t) const {
  double cycle = 0.0;
  for (const auto& s : segments) cycle += s.duration;
  double u = std::fmod(std::max(t, 0.0), cycle);
  for (const auto& s : segments) {
    if (u < s.duration || &s == &segments.back()) {
      const double r = std::min(u / s.duration, 1.0);
      double yaw = s.yaw_start + r * (s.yaw_end - s.yaw_start);
      if (s.yaw_sine_period > 0.0)
        yaw += s.yaw_sine_amplitude * std::sin(2.0 * std::numbers::pi * u / s.yaw_sine_period);
      return {s.forward_start + r * (s.forward_end - s.forward_start), yaw};
    }
    u -= s.duration;
  }
  return {0.0, 0.0};
}

Twist drive_twist(double forward, double yaw_rate) {
  Twist x = Twist::Zero();
  x(0) = -forward;
  x(5) = -yaw_rate;
  return x;
}

Pose planar_pose(double x, double y, double yaw) {
  return Pose::from_world(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(),
                          Eigen::Vector3d(x, y, 0.0));
}

std::array<double, 3> PlanarTruth::state_at(double t) const {
  if (t < -kTimeTol || t > end_time() + kTimeTol) throw DomainError("time outside the ground truth");
  t = std::clamp(t, 0.0, end_time());
  const auto i = std::min(static_cast<std::size_t>(std::floor(t / step + kTimeTol)), states.size() - 1);
  const double ti = step * static_cast<double>(i);
  if (std::abs(t - ti) <= kTimeTol) return states[i];
  return integrate(script, states[i], ti, t);
}

Pose PlanarTruth::pose_at(double t) const {
  const auto s = state_at(t);
  return planar_pose(s[0], s[1], s[2]);
}

MobileDataset simulate(const MobileConfig& config) {
  config.validate();
  MobileDataset d;
  d.truth.script = config.script;
  const double T = config.script.duration;
  const auto n = static_cast<std::size_t>(std::floor(T / d.truth.step + kTimeTol));
  d.truth.states.reserve(n + 1);
  State s = config.initial_pose;
  d.truth.states.push_back(s);
  for (std::size_t i = 0; i < n; ++i) {
    s = integrate(config.script, s, d.truth.step * i, d.truth.step * (i + 1));
    d.truth.states.push_back(s);
  }
  const double end = d.truth.end_time();

  std::seed_seq odo_seed{config.seed, std::uint64_t{1}};
  std::mt19937_64 odo_rng(odo_seed);
  std::normal_distribution<double> gauss;
  std::array<double, 2> bias{0.0, 0.0};
  double prev = 0.0;
  for (double t : schedule(1.0 / config.odometry_rate, end)) {
    for (int c = 0; c < 2; ++c) bias[c] += std::sqrt(config.odometry_bias_psd[c] * (t - prev)) * gauss(odo_rng);
    prev = t;
    const auto u = config.script.evaluate(t);
    const double f = u[0] - bias[0] + config.odometry_white_std[0] * gauss(odo_rng);
    const double w = u[1] - bias[1] + config.odometry_white_std[1] * gauss(odo_rng);
    d.odometry.times.push_back(t);
    d.odometry.v.push_back(drive_twist(f, w));
  }

  std::seed_seq range_seed{config.seed, std::uint64_t{2}};
  std::mt19937_64 range_rng(range_seed);
  const double sigma = std::sqrt(config.range_variance);
  for (double t : schedule(config.dt_landmark, end)) {
    const Eigen::Vector3d p = d.truth.pose_at(t).position();
    for (std::size_t l = 0; l < config.landmarks.size(); ++l) {
      const double r = (p - config.landmarks[l]).norm();
      if (r > config.max_range) continue;
      d.ranges.push_back({t, l, r + sigma * gauss(range_rng)});
    }
  }

  std::seed_seq map_seed{config.seed, std::uint64_t{3}};
  std::mt19937_64 map_rng(map_seed);
  for (const auto& l : config.landmarks) {
    const double dx = config.landmark_position_std * gauss(map_rng);
    const double dy = config.landmark_position_std * gauss(map_rng);
    d.surveyed_landmarks.push_back(l + Eigen::Vector3d(dx, dy, 0.0));
  }
  return d;
}

namespace {

constexpr double kWarmStartWindow = 10.0;

struct ProblemBuilder {
  const MobileConfig& config;
  const MobileDataset& data;
  bool inputs;
  PriorHyper hyper;
  std::vector<double> times;
  std::vector<InputProfile> profiles;
  std::vector<IntervalBlocks> blocks;
  std::vector<IntervalBlocks> odo_blocks;

  // Nodes [i0, i1] with all measurements in their time span. Later windows
  // start from a fully fixed node.
  Problem build(std::size_t i0, std::size_t i1, const std::vector<StateNode>& init) const {
    Problem p;
    p.hyper = hyper;
    p.nodes.assign(init.begin() + i0, init.begin() + i1 + 1);
    p.profiles.assign(profiles.begin() + i0, profiles.begin() + i1);
    const std::vector<double> sub(times.begin() + i0, times.begin() + i1 + 1);
    const double t_lo = sub.front() - kTimeTol, t_hi = sub.back() + kTimeTol;

    const auto planar = std::make_shared<PlanarLockFactor>();
    for (std::size_t k = 1; k < sub.size(); ++k) p.add(std::make_shared<NodeFactor>(k, planar));
    if (i0 == 0) {
      p.lock(0, true, false);
      const Twist v0 = odometry_at(data.odometry, sub.front());
      p.add(std::make_shared<NodeFactor>(
          0, std::make_shared<VelocityFactor>(v0, planar_velocity_covariance(config.initial_velocity_variance),
                                              kPlanarVelocity, inputs ? v0 : Twist::Zero())));
    } else {
      p.lock(0, true, true);
    }
    if (!inputs) {
      const Matrix6 R = planar_velocity_covariance(config.velocity_variance);
      const auto& ot = data.odometry.times;
      for (auto i = static_cast<std::size_t>(std::lower_bound(ot.begin(), ot.end(), t_lo) - ot.begin());
           i < ot.size() && ot[i] <= t_hi; ++i)
        attach(p, sub, ot[i], std::make_shared<VelocityFactor>(data.odometry.v[i], R, kPlanarVelocity));
    }
    auto r = std::lower_bound(data.ranges.begin(), data.ranges.end(), t_lo,
                              [](const RangeMeasurement& m, double t) { return m.time < t; });
    for (; r != data.ranges.end() && r->time <= t_hi; ++r)
      attach(p, sub, r->time,
             std::make_shared<RangeFactor>(data.surveyed_landmarks.at(r->landmark), r->range, config.range_variance));
    return p;
  }

  std::vector<IntervalBlocks> intervals(std::size_t i0, std::size_t i1) const {
    return {blocks.begin() + i0, blocks.begin() + i1};
  }

  // Dead reckoning from node k onto node k + 1.
  StateNode propagate(const StateNode& n, std::size_t k) const {
    StateNode out;
    out.time = times[k + 1];
    if (inputs) {
      std::tie(out.pose, out.bias) = prior_mean_propagate(n.pose, n.bias, odo_blocks[k], times[k + 1]);
    } else {
      out.pose = prior_mean_propagate(n.pose, Twist::Zero(), odo_blocks[k], times[k + 1]).first;
      out.bias = odometry_at(data.odometry, times[k + 1]);
    }
    return out;
  }
};

}  // namespace

ExperimentResult run_experiment(const MobileConfig& config, const MobileDataset& data) {
  config.validate();
  const bool inputs = config.method == Method::Inputs;
  const double end = std::min(data.truth.end_time(), data.odometry.times.back());

  std::vector<double> node_times;
  if (config.nodes == NodePolicy::EveryInputTick) {
    for (double t : data.odometry.times)
      if (t <= end + kTimeTol) node_times.push_back(t);
  } else {
    node_times = schedule(config.dt_landmark, end);
  }
  if (node_times.size() < 2) throw ConfigError("fewer than two estimation nodes");
  const std::size_t K = node_times.size();

  const auto& qc = inputs ? config.inputs_qc : config.wnoa_qc;
  ProblemBuilder builder{config, data, inputs,
                         PriorHyper::diagonal((Vector6() << qc[0], qc[0], qc[0], qc[1], qc[1], qc[1]).finished()),
                         node_times, {}, {}, {}};

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k + 1 < K; ++k) {
    InputProfile odo = from_samples(data.odometry, node_times[k], node_times[k + 1]);
    builder.odo_blocks.emplace_back(odo, node_times[k], node_times[k + 1], builder.hyper);
    builder.profiles.push_back(inputs ? odo : InputProfile::zero(node_times[k + 1] - node_times[k]));
  }
  if (inputs) {
    builder.blocks = builder.odo_blocks;
  } else {
    for (std::size_t k = 0; k + 1 < K; ++k)
      builder.blocks.emplace_back(builder.profiles[k], node_times[k], node_times[k + 1], builder.hyper);
  }

  // Warm start: solve consecutive short windows, each seeded by dead reckoning
  // from the previous window's end.
  std::vector<StateNode> init(K);
  init[0].time = node_times[0];
  init[0].pose = data.truth.pose_at(node_times[0]);
  init[0].bias = inputs ? Twist::Zero() : odometry_at(data.odometry, node_times[0]);
  for (std::size_t i0 = 0; i0 + 1 < K;) {
    std::size_t i1 = i0 + 1;
    while (i1 + 1 < K && node_times[i1 + 1] <= node_times[i0] + kWarmStartWindow + kTimeTol) ++i1;
    for (std::size_t k = i0; k < i1; ++k) init[k + 1] = builder.propagate(init[k], k);
    const Solution w = solve(builder.build(i0, i1, init), builder.intervals(i0, i1));
    std::copy(w.nodes.begin(), w.nodes.end(), init.begin() + static_cast<std::ptrdiff_t>(i0));
    i0 = i1;
  }

  Solution sol = solve(builder.build(0, K - 1, init), std::move(builder.blocks));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ExperimentResult res;
  res.node_times = node_times;
  Metrics& m = res.metrics;
  m.solve_seconds = seconds;
  m.iterations = sol.iterations;
  m.converged = sol.converged;
  m.node_count = K;

  double pos2 = 0.0, rot2 = 0.0, nees = 0.0, var = 0.0;
  const std::array<int, 3> planar_idx{0, 1, 5};
  const double dt = 1.0 / config.eval_rate;
  for (std::size_t i = 0;; ++i) {
    const double t = node_times.front() + config.eval_offset + static_cast<double>(i) * dt;
    if (t > node_times.back() + kTimeTol) break;
    const QueryResult q = sol.query(std::min(t, node_times.back()), true);
    const Pose gt = data.truth.pose_at(t);
    const double ep = (q.pose.position() - gt.position()).norm();
    const double er = so3::angle(gt.world_from_body() * q.pose.world_from_body().transpose());
    pos2 += ep * ep;
    rot2 += er * er;
    m.position_max = std::max(m.position_max, ep);
    m.rotation_max = std::max(m.rotation_max, er);

    const Matrix12& P = *q.covariance;
    const Twist delta = log_map(gt * q.pose.inverse());
    Eigen::Vector3d e;
    Eigen::Matrix3d S;
    for (int a = 0; a < 3; ++a) {
      e(a) = delta(planar_idx[a]);
      for (int b = 0; b < 3; ++b) S(a, b) = P(planar_idx[a], planar_idx[b]);
    }
    nees += e.dot(S.ldlt().solve(e));
    const Eigen::Matrix3d R = q.pose.rotation();
    var += (R.transpose() * P.topLeftCorner<3, 3>() * R).topLeftCorner<2, 2>().trace();

    TrajectoryRow row;
    row.time = t;
    row.truth = gt;
    row.estimate = q.pose;
    row.velocity = -q.velocity;
    row.covariance_diagonal = P.diagonal();
    res.trajectory.push_back(row);
  }
  const double n = static_cast<double>(res.trajectory.size());
  m.position_rmse = std::sqrt(pos2 / n);
  m.rotation_rmse = std::sqrt(rot2 / n);
  m.mean_nees = nees / n;
  m.predicted_position_std = std::sqrt(var / n);
  return res;
}

ExperimentResult run_experiment(const MobileConfig& config) { return run_experiment(config, simulate(config)); }

std::vector<SweepRow> sweep(const MobileConfig& config, const std::vector<double>& dt_landmarks,
                            const std::vector<Method>& methods) {
  std::vector<std::future<SweepRow>> jobs;
  for (Method method : methods)
    for (double dt : dt_landmarks) {
      MobileConfig c = config;
      c.method = method;
      c.dt_landmark = dt;
      jobs.push_back(std::async(std::launch::async, [c]() {
        return SweepRow{c.method, c.nodes, c.dt_landmark, run_experiment(c).metrics};
      }));
    }
  std::vector<SweepRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

}  // namespace ctgp::harness
