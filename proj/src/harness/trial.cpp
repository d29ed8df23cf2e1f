#include "drsgk/harness/trial.hpp"

#include <algorithm>
#include <chrono>

namespace drsgk::harness {

StreamKey true_noise_key(std::uint64_t seed, long t) {
  StreamKey key;
  key.seed = seed;
  key.time = static_cast<std::uint32_t>(t);
  key.channel = Channel::kTrueNoise;
  return key;
}

TrialResult run_trial(const Scenario& scenario, const GatekeeperConfig& config,
                      std::uint64_t seed, const TrialOptions& options) {
  if (options.max_steps < 1) throw ConfigError("trial.max_steps must be >= 1");
  const auto started = std::chrono::steady_clock::now();

  TrialResult result;
  result.seed = seed;
  Gatekeeper gatekeeper(scenario.problem(), config, seed);
  const SystemModel& model = scenario.model();
  const double dt = model.dt();

  StateVector x = scenario.initial_state();
  for (long t = 0;; ++t) {
    const double margin = x.all_finite() ? scenario.true_margin(x) : -kInfinity;
    result.min_margin = std::min(result.min_margin, margin);
    if (!(margin >= 0.0)) {
      result.safe = false;
    } else if (scenario.goal_reached(x)) {
      result.goal_reached = true;
      result.goal_time = static_cast<double>(t) * dt;
    }
    const bool done = !result.safe || result.goal_reached ||
                      static_cast<std::size_t>(t) >= options.max_steps;
    if (done) {
      if (options.record_trajectory) {
        result.trajectory.push_back({t, x, std::nullopt, false, gatekeeper.committed_switch()});
      }
      break;
    }

    FilterStep step = gatekeeper.step(t, x);
    if (step.outcome) {
      ++result.certifications;
      if (step.outcome->fell_back) ++result.fallbacks;
      if (options.record_diagnostics) result.diagnostics.push_back(std::move(*step.outcome));
    }
    if (step.backup_active) ++result.backup_steps;
    if (options.record_trajectory) {
      result.trajectory.push_back({t, x, step.control, step.backup_active, step.committed_switch});
    }

    RngStream stream(true_noise_key(seed, t));
    const NoiseVector w = scenario.true_noise().sample(x, step.control, stream);
    x = model.step(x, step.control, w);
    ++result.steps;
  }

  result.backup_ratio = result.steps == 0
                            ? 0.0
                            : static_cast<double>(result.backup_steps) /
                                  static_cast<double>(result.steps);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

TrialResult run_trial(const RunConfig& config, const GatekeeperConfig& gatekeeper,
                      std::uint64_t seed, const TrialOptions& options) {
  const auto scenario = ScenarioRegistry::global().create(config.scenario_name,
                                                          config.scenario, seed);
  return run_trial(*scenario, gatekeeper, seed, options);
}

}  // namespace drsgk::harness
