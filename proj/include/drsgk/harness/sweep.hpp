#pragma once

#include <cstdint>
#include <vector>

#include "drsgk/harness/config.hpp"
#include "drsgk/harness/trial.hpp"

namespace drsgk::harness {

/// Aggregate metrics for one axis value.
struct MetricsRow {
  double value = 0.0;
  std::size_t trials = 0;
  std::size_t safe = 0;
  std::size_t goals = 0;
  double safe_percent = 0.0;
  double mean_goal_time = kInfinity;  ///< over goal-reaching trials only
  double mean_backup_ratio = 0.0;     ///< fraction, not percent
};

/// Aggregates in the order given; the same order always gives the same bits.
MetricsRow aggregate(double value, const std::vector<TrialResult>& trials);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kEpsilon;
  std::vector<double> values;
  GatekeeperConfig fixed;
  std::vector<std::uint64_t> seeds;
};

/// The sweep described by a run config (a single-value sweep at the configured
/// axis value when the config has no sweep section).
SweepSpec sweep_spec(const RunConfig& config);

struct SweepResult {
  SweepSpec spec;
  std::vector<MetricsRow> rows;                  ///< one per value
  std::vector<std::vector<TrialResult>> trials;  ///< [value][seed]
};

/// Runs every (value, seed) trial, in parallel across trials.
SweepResult run_sweep(const RunConfig& config, const SweepSpec& spec,
                      const TrialOptions& options);

/// Summary of a Lipschitz calibration pass.
struct CalibrationResult {
  std::vector<double> estimates;  ///< max gradient norm per certification state
  double maximum = 0.0;
  std::size_t states = 0;
};

/*!
 * Estimates L_H along filtered trajectories: runs trials with `config`, then
 * re-certifies every `stride`-th visited state with the gradient estimator
 * enabled on `gradient_samples` samples per candidate.
 */
CalibrationResult calibrate_lipschitz(const RunConfig& config,
                                      const std::vector<std::uint64_t>& seeds,
                                      std::size_t stride, std::size_t gradient_samples);

}  // namespace drsgk::harness
