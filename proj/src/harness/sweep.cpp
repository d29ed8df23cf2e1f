#include "drsgk/harness/sweep.hpp"

#include <algorithm>

#include "drsgk/parallel.hpp"

namespace drsgk::harness {

MetricsRow aggregate(double value, const std::vector<TrialResult>& trials) {
  MetricsRow row;
  row.value = value;
  row.trials = trials.size();
  double goal_sum = 0.0;
  double backup_sum = 0.0;
  for (const auto& t : trials) {
    if (t.safe) ++row.safe;
    if (t.goal_reached) {
      ++row.goals;
      goal_sum += t.goal_time;
    }
    backup_sum += t.backup_ratio;
  }
  if (row.trials > 0) {
    row.safe_percent = 100.0 * static_cast<double>(row.safe) / static_cast<double>(row.trials);
    row.mean_backup_ratio = backup_sum / static_cast<double>(row.trials);
  }
  if (row.goals > 0) row.mean_goal_time = goal_sum / static_cast<double>(row.goals);
  return row;
}

SweepSpec sweep_spec(const RunConfig& config) {
  SweepSpec spec;
  spec.fixed = config.gatekeeper;
  if (config.sweep) {
    spec.axis = config.sweep->axis;
    spec.values = config.sweep->values;
    spec.seeds = config.sweep->seeds;
  } else {
    spec.axis = SweepAxis::kEpsilon;
    spec.values = {config.gatekeeper.epsilon};
    spec.seeds = {config.trial.seed};
  }
  return spec;
}

SweepResult run_sweep(const RunConfig& config, const SweepSpec& spec,
                      const TrialOptions& options) {
  SweepResult result;
  result.spec = spec;
  std::vector<GatekeeperConfig> configs;
  for (double v : spec.values) {
    configs.push_back(apply_axis(spec.fixed, spec.axis, v));
    configs.back().validate();
  }

  const std::size_t seeds = spec.seeds.size();
  std::vector<TrialResult> flat(spec.values.size() * seeds);
  parallel_for(flat.size(), [&](std::size_t job) {
    const std::size_t v = job / seeds;
    const std::size_t s = job % seeds;
    flat[job] = run_trial(config, configs[v], spec.seeds[s], options);
  });

  for (std::size_t v = 0; v < spec.values.size(); ++v) {
    std::vector<TrialResult> group(std::make_move_iterator(flat.begin() + v * seeds),
                                   std::make_move_iterator(flat.begin() + (v + 1) * seeds));
    result.rows.push_back(aggregate(spec.values[v], group));
    result.trials.push_back(std::move(group));
  }
  return result;
}

CalibrationResult calibrate_lipschitz(const RunConfig& config,
                                      const std::vector<std::uint64_t>& seeds,
                                      std::size_t stride, std::size_t gradient_samples) {
  if (stride < 1) throw ConfigError("calibration stride must be >= 1");
  GatekeeperConfig estimating = config.gatekeeper;
  estimating.fixed_lipschitz.reset();
  estimating.gradient_samples = std::min(gradient_samples, estimating.samples);
  estimating.skip_unattainable = false;
  estimating.validate();

  struct Job {
    std::uint64_t seed;
    long step;
    StateVector state;
  };
  std::vector<Job> jobs;
  TrialOptions options;
  options.max_steps = config.trial.max_steps;
  options.record_trajectory = true;
  for (auto seed : seeds) {
    const TrialResult trial = run_trial(config, config.gatekeeper, seed, options);
    for (const auto& row : trial.trajectory) {
      if (row.control && row.step % static_cast<long>(stride) == 0) {
        jobs.push_back({seed, row.step, row.state});
      }
    }
  }

  CalibrationResult result;
  result.estimates.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto scenario = ScenarioRegistry::global().create(config.scenario_name,
                                                            config.scenario, jobs[j].seed);
    const CertificationOutcome outcome = certify(jobs[j].step, jobs[j].state, jobs[j].step,
                                                 scenario->problem(), estimating, jobs[j].seed);
    result.estimates[j] = *std::max_element(outcome.lipschitz.begin(), outcome.lipschitz.end());
  });
  result.states = jobs.size();
  for (double e : result.estimates) result.maximum = std::max(result.maximum, e);
  return result;
}

}  // namespace drsgk::harness
