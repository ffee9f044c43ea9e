#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "ctgp/errors.hpp"
#include "ctgp/harness.hpp"

namespace ctgp::harness {

namespace {

std::ofstream open_file(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void pose_columns(std::ostream& out, const Pose& T) {
  const Eigen::Vector3d p = T.position();
  const Eigen::Quaterniond q(T.world_from_body());
  out << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << q.w() << ',' << q.x() << ',' << q.y() << ','
      << q.z();
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "time,gt_x,gt_y,gt_z,gt_qw,gt_qx,gt_qy,gt_qz,est_x,est_y,est_z,est_qw,est_qx,est_qy,est_qz,"
         "vx,vy,vz,wx,wy,wz";
  for (int i = 0; i < 12; ++i) out << ",cov" << i;
  out << '\n';
  for (const auto& r : rows) {
    out << r.time;
    pose_columns(out, r.truth);
    pose_columns(out, r.estimate);
    for (int i = 0; i < 6; ++i) out << ',' << r.velocity(i);
    for (int i = 0; i < 12; ++i) out << ',' << r.covariance_diagonal(i);
    out << '\n';
  }
}

void write_metrics_header(std::ostream& out) {
  out << "scenario,method,nodes,dt_landmark,seed,node_count,position_rmse,position_max,rotation_rmse,"
         "rotation_max,solve_seconds,iterations,converged,mean_nees,predicted_position_std\n";
}

void write_metrics_row(std::ostream& out, const std::string& scenario, Method method, NodePolicy nodes,
                       double dt_landmark, std::uint64_t seed, const Metrics& m) {
  out << scenario << ',' << to_string(method) << ',' << to_string(nodes) << ',' << dt_landmark << ',' << seed << ','
      << m.node_count << ',' << m.position_rmse << ',' << m.position_max << ',' << m.rotation_rmse << ','
      << m.rotation_max << ',' << m.solve_seconds << ',' << m.iterations << ',' << (m.converged ? 1 : 0) << ','
      << m.mean_nees << ',' << m.predicted_position_std << '\n';
}

void write_fig3_csv(std::ostream& out, const std::vector<Fig3Sample>& samples) {
  out << "time,x,y,z,yaw,vx,vy,vz,wx,wy,wz,x_3sigma,y_3sigma\n";
  for (const auto& s : samples) {
    out << s.time << ',' << s.position.x() << ',' << s.position.y() << ',' << s.position.z() << ',' << s.yaw;
    for (int i = 0; i < 6; ++i) out << ',' << s.velocity(i);
    out << ',' << s.position_3sigma.x() << ',' << s.position_3sigma.y() << '\n';
  }
}

void write_continuum_csv(std::ostream& out, const std::vector<ContinuumRow>& rows) {
  out << "configuration,measurement,method,position_rmse,position_max,rotation_rmse,rotation_max,solve_seconds,"
         "converged\n";
  for (const auto& r : rows)
    out << r.configuration << ',' << (r.position_only ? "position" : "pose") << ','
        << (r.use_inputs ? "inputs" : "no-inputs") << ',' << r.errors.position_rmse << ',' << r.errors.position_max
        << ',' << r.errors.rotation_rmse << ',' << r.errors.rotation_max << ',' << r.solve_seconds << ','
        << (r.converged ? 1 : 0) << '\n';
}

void write_dataset(const std::string& directory, const MobileDataset& data, const MobileConfig& config) {
  const std::filesystem::path dir(directory);
  std::filesystem::create_directories(dir);

  auto truth = open_file(dir / "ground_truth.csv");
  truth << "time,x,y,yaw\n";
  for (std::size_t i = 0; i < data.truth.states.size(); i += 10) {
    const auto& s = data.truth.states[i];
    truth << data.truth.step * static_cast<double>(i) << ',' << s[0] << ',' << s[1] << ',' << s[2] << '\n';
  }

  write_input_log((dir / "odometry.csv").string(), data.odometry);

  auto ranges = open_file(dir / "ranges.csv");
  ranges << "time,landmark,lx,ly,lz,range\n";
  for (const auto& r : data.ranges) {
    const auto& l = config.landmarks[r.landmark];
    ranges << r.time << ',' << r.landmark << ',' << l.x() << ',' << l.y() << ',' << l.z() << ',' << r.range << '\n';
  }
}

}  // namespace ctgp::harness
