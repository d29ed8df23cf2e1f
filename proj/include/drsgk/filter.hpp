#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "drsgk/core.hpp"
#include "drsgk/rollout.hpp"

namespace drsgk {

/// Parameters of the certification loop.
struct GatekeeperConfig {
  std::size_t candidates = 10;  ///< M, switching offsets 0..M-1
  std::size_t horizon = 10;     ///< T, rollout length in steps
  std::size_t samples = 1000;   ///< N, rollouts per candidate
  double delta = 0.01;          ///< joint error rate
  double epsilon = 0.05;        ///< failure budget
  double beta = 0.01;           ///< infinity-Wasserstein radius
  double alpha = 0.0;           ///< backup invariance failure budget
  std::optional<double> fixed_lipschitz;  ///< skip estimation when set
  double fd_step = kDefaultFdStep;
  std::optional<std::size_t> gradient_samples;  ///< default: all N
  std::size_t recertify_period = 1;
  /// Skip rollouts when even zero violations cannot certify.
  bool skip_unattainable = true;

  /// Throws ConfigError on inconsistent parameters.
  void validate() const;
  std::size_t effective_gradient_samples() const;
};

/*!
 * Result of one certification call.
 *
 * counts/lipschitz/bounds have one entry per candidate, except when the
 * threshold is unattainable and rollouts were skipped (then they are empty).
 */
struct CertificationOutcome {
  long time = 0;
  std::vector<std::size_t> counts;
  std::vector<double> lipschitz;
  std::vector<double> bounds;
  std::vector<std::size_t> feasible;
  long selected_switch = 0;
  bool fell_back = false;

  double rho = 0.0;
  double threshold = 0.0;
  bool lipschitz_estimated = false;
  bool lipschitz_subsampled = false;  ///< gradients on fewer than N samples
  bool unattainable = false;
  std::size_t diverged_rollouts = 0;
  std::size_t diverged_gradients = 0;
};

/// Everything certify() needs about the plant and the safety requirement.
struct CertificationProblem {
  const SystemModel* model = nullptr;
  const Policy* nominal = nullptr;
  const Policy* backup = nullptr;
  const SafetySpec* safety = nullptr;
  const NoiseSampler* sampler = nullptr;        ///< nominal noise distribution
  const ThetaSampler* theta_sampler = nullptr;  ///< may be null: exact geometry

  ClosedLoop loop() const { return {model, nominal, backup, safety}; }
};

/// Candidates whose bound is at most the threshold (ties are feasible).
std::vector<std::size_t> feasible_candidates(const std::vector<double>& bounds,
                                             double threshold);

/// t + max(feasible), or previous_switch when nothing is feasible.
long select_switch(long t, const std::vector<std::size_t>& feasible, long previous_switch);

/*!
 * One certification step: evaluate M candidate switching offsets with N
 * sampled rollouts each, bound every candidate's inflated failure
 * probability and pick the latest certified switching time. When
 * `batches_out` is given it receives the raw per-sample margins.
 */
CertificationOutcome certify(long t, const StateVector& x, long previous_switch,
                             const CertificationProblem& problem,
                             const GatekeeperConfig& config, std::uint64_t seed,
                             std::vector<RolloutBatch>* batches_out = nullptr);

/// Control applied by the filter at one simulation step.
struct FilterStep {
  ControlVector control;
  long committed_switch = 0;
  bool backup_active = false;
  std::optional<CertificationOutcome> outcome;  ///< set on certification steps
};

/*!
 * Stateful safety filter.
 *
 * Certifies every recertify_period steps (counted from start_time) and
 * otherwise reuses the committed switching time. The commitment starts at
 * start_time, i.e. immediate backup.
 */
class Gatekeeper {
 public:
  Gatekeeper(CertificationProblem problem, GatekeeperConfig config, std::uint64_t seed,
             long start_time = 0);

  FilterStep step(long sim_time, const StateVector& x);

  long committed_switch() const { return committed_switch_; }
  const GatekeeperConfig& config() const { return config_; }

 private:
  CertificationProblem problem_;
  GatekeeperConfig config_;
  std::uint64_t seed_;
  long start_time_;
  long committed_switch_;
};

}  // namespace drsgk
