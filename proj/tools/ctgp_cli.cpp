#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "ctgp/errors.hpp"
#include "ctgp/harness.hpp"

using namespace ctgp;
using namespace ctgp::harness;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> nodes;
  std::optional<double> dt_landmark;
  std::vector<double> dts{0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
  std::string variant = "both";
};

std::ofstream open_out(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out);
  const auto path = std::filesystem::path(o.out) / name;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << std::setprecision(12);
  std::cout << "wrote " << path.string() << '\n';
  return f;
}

MobileConfig mobile_config(const Options& o) {
  const ScenarioConfig s = load_scenario(o.config);
  if (s.domain != "mobile") throw ConfigError("this subcommand needs a mobile scenario");
  MobileConfig c = s.mobile;
  if (o.seed) c.seed = *o.seed;
  if (o.method) c.method = parse_method(*o.method);
  if (o.nodes) c.nodes = parse_node_policy(*o.nodes);
  if (o.dt_landmark) c.dt_landmark = *o.dt_landmark;
  c.validate();
  return c;
}

void cmd_simulate(const Options& o) {
  const MobileConfig c = mobile_config(o);
  const MobileDataset d = simulate(c);
  write_dataset(o.out, d, c);
  std::cout << "simulated " << d.truth.end_time() << " s, " << d.odometry.times.size() << " odometry samples, "
            << d.ranges.size() << " ranges\n";
}

void cmd_estimate(const Options& o) {
  const MobileConfig c = mobile_config(o);
  const ExperimentResult r = run_experiment(c);
  auto traj = open_out(o, "trajectory.csv");
  write_trajectory_csv(traj, r.trajectory);
  auto metrics = open_out(o, "metrics.csv");
  write_metrics_header(metrics);
  write_metrics_row(metrics, c.name, c.method, c.nodes, c.dt_landmark, c.seed, r.metrics);
  std::cout << to_string(c.method) << ": position RMSE " << r.metrics.position_rmse << " m, rotation RMSE "
            << r.metrics.rotation_rmse << " rad, " << r.metrics.node_count << " nodes, " << r.metrics.solve_seconds
            << " s\n";
}

void cmd_sweep(const Options& o) {
  const MobileConfig c = mobile_config(o);
  std::vector<Method> methods{Method::Inputs, Method::Wnoa};
  if (o.method) methods = {c.method};
  const auto rows = sweep(c, o.dts, methods);
  auto metrics = open_out(o, "metrics.csv");
  write_metrics_header(metrics);
  for (const auto& r : rows) {
    write_metrics_row(metrics, c.name, r.method, r.nodes, r.dt_landmark, c.seed, r.metrics);
    std::cout << std::setw(7) << to_string(r.method) << " dt=" << r.dt_landmark
              << " position RMSE=" << r.metrics.position_rmse << '\n';
  }
}

void cmd_fig3(const Options& o) {
  for (Fig3Variant v : {Fig3Variant::Velocity, Fig3Variant::Acceleration}) {
    const std::string name = v == Fig3Variant::Velocity ? "velocity" : "acceleration";
    if (o.variant != "both" && o.variant != name) continue;
    const Fig3Result r = reproduce_fig3(v);
    auto prior = open_out(o, "fig3_" + name + "_prior.csv");
    write_fig3_csv(prior, r.prior_samples);
    auto post = open_out(o, "fig3_" + name + "_posterior.csv");
    write_fig3_csv(post, r.posterior_samples);
  }
}

void cmd_continuum(const Options& o) {
  const ScenarioConfig s = load_scenario(o.config);
  if (s.domain != "continuum") throw ConfigError("continuum needs a continuum scenario");
  ContinuumConfig c = s.continuum;
  if (o.seed) c.seed = *o.seed;
  const auto rows = run_continuum(c);
  auto out = open_out(o, "continuum.csv");
  write_continuum_csv(out, rows);
  for (const auto& r : rows)
    std::cout << "config " << r.configuration << (r.position_only ? " position " : " pose     ")
              << (r.use_inputs ? "inputs    " : "no-inputs ") << "disk RMSE " << r.errors.position_rmse * 1e3
              << " mm\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time estimation with input-driven Gaussian-process priors"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", o.config, "Scenario file")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--seed", o.seed, "Random seed override");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto add_mobile = [&](CLI::App* sub) {
    sub->add_option("--method", o.method, "inputs | wnoa")->check(CLI::IsMember({"inputs", "wnoa"}));
    sub->add_option("--nodes", o.nodes, "all | meas-only")->check(CLI::IsMember({"all", "meas-only"}));
    sub->add_option("--dt-landmark", o.dt_landmark, "Range measurement interval (s)")->check(CLI::PositiveNumber);
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate ground truth, odometry and ranges");
  add_common(simulate_cmd, true);
  add_mobile(simulate_cmd);
  auto* estimate_cmd = app.add_subcommand("estimate", "Simulate and estimate one run");
  add_common(estimate_cmd, true);
  add_mobile(estimate_cmd);
  auto* sweep_cmd = app.add_subcommand("sweep", "Range-interval sweep for both methods");
  add_common(sweep_cmd, true);
  add_mobile(sweep_cmd);
  sweep_cmd->add_option("--dts", o.dts, "Landmark intervals (s)")->delimiter(',');
  auto* fig3_cmd = app.add_subcommand("fig3", "Prior and posterior for the two input patterns");
  fig3_cmd->add_option("--out", o.out, "Output directory");
  fig3_cmd->add_option("--variant", o.variant, "velocity | acceleration | both")
      ->check(CLI::IsMember({"velocity", "acceleration", "both"}));
  auto* continuum_cmd = app.add_subcommand("continuum", "Tendon-driven rod shape estimation");
  add_common(continuum_cmd, true);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate_cmd) cmd_simulate(o);
    else if (*estimate_cmd) cmd_estimate(o);
    else if (*sweep_cmd) cmd_sweep(o);
    else if (*fig3_cmd) cmd_fig3(o);
    else if (*continuum_cmd) cmd_continuum(o);
  } catch (const ctgp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
