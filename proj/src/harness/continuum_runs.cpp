#include <random>

#include "ctgp/harness.hpp"

namespace ctgp::harness {

std::vector<ContinuumRow> run_continuum(const ContinuumConfig& config) {
  config.validate();
  ShapeEstimatorSettings settings = ShapeEstimatorSettings::defaults();
  settings.hyper = PriorHyper::diagonal(config.qc);
  settings.node_count = config.node_count;
  settings.input_step = config.input_step;
  settings.tip_strain_covariance = config.tip_strain_variance.asDiagonal();

  std::vector<ContinuumRow> rows;
  for (std::size_t c = 0; c < config.configurations.size(); ++c) {
    const auto& cfg = config.configurations[c];
    std::vector<TendonRoute> tendons = config.tendons;
    for (std::size_t i = 0; i < tendons.size(); ++i) tendons[i].tension = cfg.tensions[i];
    const RodShape truth = simulate_rod(config.rod, tendons, cfg.tip_force);

    TipMeasurement meas;
    meas.pose = truth.pose_at(config.rod.length);
    meas.covariance = config.pose_variance.asDiagonal();
    if (config.measurement_noise) {
      std::seed_seq seed{config.seed, static_cast<std::uint64_t>(c)};
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss;
      Twist noise;
      for (int i = 0; i < 6; ++i) noise(i) = std::sqrt(config.pose_variance(i)) * gauss(rng);
      meas.pose = (exp_map(noise) * meas.pose).normalized();
    }

    for (bool position_only : {false, true})
      for (bool use_inputs : {true, false}) {
        settings.use_inputs = use_inputs;
        meas.position_only = position_only;
        const ShapeEstimate est = estimate_shape(config.rod, tendons, meas, settings);
        rows.push_back({c, position_only, use_inputs, shape_errors(config.rod, truth, est), est.solve_seconds,
                        est.solution.converged});
      }
  }
  return rows;
}

}  // namespace ctgp::harness
