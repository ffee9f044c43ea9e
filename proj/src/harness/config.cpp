#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ctgp/errors.hpp"
#include "ctgp/harness.hpp"

namespace ctgp::harness {

namespace {

template <typename T>
T get(const YAML::Node& n, const char* key, T fallback) {
  if (!n || !n[key]) return fallback;
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const YAML::Node& n, const char* key) {
  if (!n || !n[key]) throw ConfigError(std::string("missing key '") + key + "'");
  return get<T>(n, key, T{});
}

// Scalar or [start, end] pair.
std::array<double, 2> ramp(const YAML::Node& n, const char* key) {
  if (!n[key]) return {0.0, 0.0};
  if (n[key].IsScalar()) {
    const double v = n[key].as<double>();
    return {v, v};
  }
  const auto v = n[key].as<std::vector<double>>();
  if (v.size() != 2) throw ConfigError(std::string("'") + key + "' must be a scalar or a [start, end] pair");
  return {v[0], v[1]};
}

std::array<double, 2> pair(const YAML::Node& n, const char* key, std::array<double, 2> fallback) {
  if (!n || !n[key]) return fallback;
  const auto v = n[key].as<std::vector<double>>();
  if (v.size() != 2) throw ConfigError(std::string("'") + key + "' must have two entries");
  return {v[0], v[1]};
}

// Two values expand to three translational and three rotational entries.
Vector6 six(const YAML::Node& n, const char* key, const Vector6& fallback) {
  if (!n || !n[key]) return fallback;
  const auto v = n[key].as<std::vector<double>>();
  if (v.size() == 2) return (Vector6() << v[0], v[0], v[0], v[1], v[1], v[1]).finished();
  if (v.size() == 6) return Eigen::Map<const Vector6>(v.data());
  throw ConfigError(std::string("'") + key + "' must have two or six entries");
}

Eigen::Vector3d point(const std::vector<double>& v) {
  if (v.size() == 2) return {v[0], v[1], 0.0};
  if (v.size() == 3) return {v[0], v[1], v[2]};
  throw ConfigError("points need two or three coordinates");
}

MobileConfig parse_mobile(const YAML::Node& root) {
  MobileConfig c;
  c.name = get<std::string>(root, "name", "mobile");
  c.seed = get<std::uint64_t>(root, "seed", 1);
  const YAML::Node script = root["script"];
  if (!script || !script["segments"]) throw ConfigError("mobile scenario needs script.segments");
  for (const auto& s : script["segments"]) {
    ScriptSegment seg;
    seg.duration = require<double>(s, "duration");
    const auto f = ramp(s, "forward");
    const auto y = ramp(s, "yaw");
    seg.forward_start = f[0];
    seg.forward_end = f[1];
    seg.yaw_start = y[0];
    seg.yaw_end = y[1];
    if (s["yaw_sine"]) {
      seg.yaw_sine_amplitude = require<double>(s["yaw_sine"], "amplitude");
      seg.yaw_sine_period = require<double>(s["yaw_sine"], "period");
    }
    c.script.segments.push_back(seg);
  }
  double cycle = 0.0;
  for (const auto& s : c.script.segments) cycle += s.duration;
  c.script.duration = get<double>(script, "duration", cycle);

  if (root["initial_pose"]) {
    const auto v = root["initial_pose"].as<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("initial_pose is [x, y, yaw]");
    c.initial_pose = {v[0], v[1], v[2]};
  }
  if (root["landmarks"])
    for (const auto& l : root["landmarks"]) c.landmarks.push_back(point(l.as<std::vector<double>>()));

  const YAML::Node odo = root["odometry"];
  c.odometry_rate = get<double>(odo, "rate", c.odometry_rate);
  c.odometry_white_std = pair(odo, "white_std", c.odometry_white_std);
  c.odometry_bias_psd = pair(odo, "bias_psd", c.odometry_bias_psd);

  const YAML::Node ranges = root["ranges"];
  c.dt_landmark = get<double>(ranges, "dt_landmark", c.dt_landmark);
  c.range_variance = get<double>(ranges, "variance", c.range_variance);
  c.max_range = get<double>(ranges, "max_range", c.max_range);
  c.landmark_position_std = get<double>(ranges, "landmark_position_std", c.landmark_position_std);

  const YAML::Node est = root["estimator"];
  if (est && est["method"]) c.method = parse_method(est["method"].as<std::string>());
  if (est && est["nodes"]) c.nodes = parse_node_policy(est["nodes"].as<std::string>());
  c.inputs_qc = pair(est, "inputs_qc", c.inputs_qc);
  c.wnoa_qc = pair(est, "wnoa_qc", c.wnoa_qc);
  c.velocity_variance = pair(est, "velocity_variance", c.velocity_variance);
  c.initial_velocity_variance = pair(est, "initial_velocity_variance", c.initial_velocity_variance);

  const YAML::Node ev = root["evaluation"];
  c.eval_rate = get<double>(ev, "rate", c.eval_rate);
  c.eval_offset = get<double>(ev, "offset", c.eval_offset);
  c.validate();
  return c;
}

ContinuumConfig parse_continuum(const YAML::Node& root) {
  ContinuumConfig c;
  c.name = get<std::string>(root, "name", "continuum");
  c.seed = get<std::uint64_t>(root, "seed", 1);
  const YAML::Node rod = root["rod"];
  if (!rod) throw ConfigError("continuum scenario needs a rod section");
  const double length = require<double>(rod, "length");
  const int disks = get<int>(rod, "disks", 10);
  if (disks < 1) throw ConfigError("rod.disks must be positive");
  std::vector<double> disk_s;
  for (int i = 1; i <= disks; ++i) disk_s.push_back(length * i / disks);
  try {
    c.rod = RodModel::circular(length, require<double>(rod, "diameter"), require<double>(rod, "youngs_modulus"),
                               get<double>(rod, "poisson_ratio", 0.3), disk_s);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("rod: ") + e.what());
  }
  if (!root["tendons"]) throw ConfigError("continuum scenario needs tendons");
  for (const auto& t : root["tendons"])
    c.tendons.push_back({require<double>(t, "offset"), get<double>(t, "azimuth", 0.0),
                         require<double>(t, "termination"), 0.0});
  if (!root["configurations"]) throw ConfigError("continuum scenario needs configurations");
  for (const auto& k : root["configurations"]) {
    ContinuumConfiguration cfg;
    cfg.tensions = require<std::vector<double>>(k, "tensions");
    if (k["tip_force"]) cfg.tip_force = point(k["tip_force"].as<std::vector<double>>());
    c.configurations.push_back(cfg);
  }
  const YAML::Node est = root["estimator"];
  c.qc = six(est, "qc", c.qc);
  c.pose_variance = six(est, "pose_variance", c.pose_variance);
  c.tip_strain_variance = six(est, "tip_strain_variance", c.tip_strain_variance);
  c.node_count = get<int>(est, "node_count", c.node_count);
  c.input_step = get<double>(est, "input_step", c.input_step);
  c.measurement_noise = get<bool>(root["measurement"], "noise", c.measurement_noise);
  c.validate();
  return c;
}

ScenarioConfig parse_root(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("scenario must be a mapping");
  const int version = require<int>(root, "schema_version");
  if (version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(version) + ", expected " +
                      std::to_string(kSchemaVersion));
  ScenarioConfig s;
  s.domain = require<std::string>(root, "domain");
  if (s.domain == "mobile") {
    s.mobile = parse_mobile(root);
  } else if (s.domain == "continuum") {
    s.continuum = parse_continuum(root);
  } else {
    throw ConfigError("domain must be 'mobile' or 'continuum'");
  }
  return s;
}

}  // namespace

Method parse_method(const std::string& s) {
  if (s == "inputs") return Method::Inputs;
  if (s == "wnoa") return Method::Wnoa;
  throw ConfigError("method must be 'inputs' or 'wnoa'");
}

NodePolicy parse_node_policy(const std::string& s) {
  if (s == "all") return NodePolicy::EveryInputTick;
  if (s == "meas-only") return NodePolicy::MeasurementTimesOnly;
  throw ConfigError("nodes must be 'all' or 'meas-only'");
}

std::string to_string(Method m) { return m == Method::Inputs ? "inputs" : "wnoa"; }
std::string to_string(NodePolicy p) { return p == NodePolicy::EveryInputTick ? "all" : "meas-only"; }

void MobileConfig::validate() const {
  if (script.segments.empty()) throw ConfigError("drive script is empty");
  for (const auto& s : script.segments)
    if (!(s.duration > 0.0)) throw ConfigError("script segment durations must be positive");
  if (!(script.duration > 0.0)) throw ConfigError("script duration must be positive");
  if (!(odometry_rate > 0.0) || !(dt_landmark > 0.0) || !(eval_rate > 0.0))
    throw ConfigError("schedule rates must be positive");
  if (!(range_variance > 0.0)) throw ConfigError("range variance must be positive");
  if (!(landmark_position_std >= 0.0)) throw ConfigError("landmark position error must be non-negative");
  for (double v : {inputs_qc[0], inputs_qc[1], wnoa_qc[0], wnoa_qc[1], velocity_variance[0], velocity_variance[1],
                   initial_velocity_variance[0], initial_velocity_variance[1]})
    if (!(v > 0.0)) throw ConfigError("estimator variances must be positive");
  for (double v : {odometry_white_std[0], odometry_white_std[1], odometry_bias_psd[0], odometry_bias_psd[1]})
    if (!(v >= 0.0)) throw ConfigError("odometry noise must be non-negative");
  if (landmarks.empty()) throw ConfigError("mobile scenario needs landmarks");
}

void ContinuumConfig::validate() const {
  rod.validate();
  for (const auto& k : configurations) {
    if (k.tensions.size() != tendons.size()) throw ConfigError("each configuration needs one tension per tendon");
    for (double t : k.tensions)
      if (!(t >= 0.0)) throw ConfigError("tensions must be non-negative");
  }
  for (const auto& t : tendons)
    if (!(t.termination_arclength > 0.0) || t.termination_arclength > rod.length)
      throw ConfigError("tendon termination outside the rod");
  if (node_count < 2) throw ConfigError("node_count must be at least 2");
  if (!(qc.array() > 0.0).all() || !(pose_variance.array() > 0.0).all() || !(tip_strain_variance.array() > 0.0).all())
    throw ConfigError("continuum variances must be positive");
}

ScenarioConfig parse_scenario(const std::string& yaml_text) {
  try {
    return parse_root(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario parse error: ") + e.what());
  }
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace ctgp::harness
