#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "drsgk/filter.hpp"
#include "drsgk/harness/config.hpp"
#include "drsgk/scenarios/scenario.hpp"

namespace drsgk::harness {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One row of a trial trajectory: the state at `step` and what was applied there.
struct TrajectoryRow {
  long step = 0;
  StateVector state;
  std::optional<ControlVector> control;  ///< empty on the final state
  bool backup_active = false;
  long committed_switch = 0;
};

struct TrialOptions {
  std::size_t max_steps = kDefaultMaxSteps;
  bool record_trajectory = false;
  bool record_diagnostics = false;
};

struct TrialResult {
  std::uint64_t seed = 0;
  bool safe = true;
  bool goal_reached = false;
  double goal_time = kInfinity;  ///< seconds
  double backup_ratio = 0.0;
  std::size_t steps = 0;         ///< control steps executed
  std::size_t backup_steps = 0;
  std::size_t certifications = 0;
  std::size_t fallbacks = 0;     ///< certifications with an empty feasible set
  double min_margin = kInfinity; ///< smallest true stage margin seen
  std::vector<CertificationOutcome> diagnostics;
  std::vector<TrajectoryRow> trajectory;
  double wall_time = 0.0;        ///< seconds, not part of any deterministic output
};

/// Key of the true-noise stream at simulation step t.
StreamKey true_noise_key(std::uint64_t seed, long t);

/*!
 * Simulate the filtered closed loop until the goal, a violation of the true
 * stage margin, or max_steps control steps.
 *
 * The simulator draws from scenario.true_noise(); the filter samples the
 * scenario's nominal noise. Both are keyed by `seed` on separate channels.
 */
TrialResult run_trial(const Scenario& scenario, const GatekeeperConfig& config,
                      std::uint64_t seed, const TrialOptions& options = {});

/// Builds the scenario for `seed` from the run config and runs one trial.
TrialResult run_trial(const RunConfig& config, const GatekeeperConfig& gatekeeper,
                      std::uint64_t seed, const TrialOptions& options);

}  // namespace drsgk::harness
