#include "drsgk/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drsgk/stats.hpp"

namespace drsgk {
namespace {

const ExactTheta kExactTheta;

}  // namespace

void GatekeeperConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("gatekeeper config: " + what); };
  if (candidates < 1) fail("M must be >= 1");
  if (candidates > 0xFFFF) fail("M must be < 65536");
  if (horizon < 1) fail("T must be >= 1");
  if (horizon + 1 < candidates) fail("T must be >= M - 1 so every switch happens inside the rollout");
  if (samples < 1) fail("N must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be finite and >= 0");
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(alpha < epsilon)) fail("alpha must be < epsilon");
  if (fixed_lipschitz && !(*fixed_lipschitz >= 0.0 && std::isfinite(*fixed_lipschitz))) {
    fail("fixed_lipschitz must be finite and >= 0");
  }
  if (!(fd_step > 0.0)) fail("fd_step must be > 0");
  if (gradient_samples && (*gradient_samples < 1 || *gradient_samples > samples)) {
    fail("gradient_samples must lie in [1, N]");
  }
  if (recertify_period < 1) fail("recertify_period must be >= 1");
}

std::size_t GatekeeperConfig::effective_gradient_samples() const {
  if (fixed_lipschitz) return 0;
  return gradient_samples.value_or(samples);
}

std::vector<std::size_t> feasible_candidates(const std::vector<double>& bounds,
                                             double threshold) {
  std::vector<std::size_t> feasible;
  for (std::size_t m = 0; m < bounds.size(); ++m) {
    if (bounds[m] <= threshold) feasible.push_back(m);
  }
  return feasible;
}

long select_switch(long t, const std::vector<std::size_t>& feasible, long previous_switch) {
  if (feasible.empty()) return previous_switch;
  return t + static_cast<long>(*std::max_element(feasible.begin(), feasible.end()));
}

CertificationOutcome certify(long t, const StateVector& x, long previous_switch,
                             const CertificationProblem& problem,
                             const GatekeeperConfig& config, std::uint64_t seed,
                             std::vector<RolloutBatch>* batches_out) {
  config.validate();
  if (!problem.model || !problem.nominal || !problem.backup || !problem.safety ||
      !problem.sampler) {
    throw ConfigError("certify: incomplete certification problem");
  }
  if (config.alpha < problem.safety->alpha()) {
    throw ConfigError("certify: alpha is below the backup's failure budget");
  }
  if (t < 0) throw DomainError("certify: negative time");
  if (!x.all_finite()) throw DomainError("certify: state is not finite");

  CertificationOutcome out;
  out.time = t;
  out.rho = stats::per_candidate_error(config.delta, static_cast<std::int64_t>(config.candidates));
  out.threshold = stats::dr_threshold(config.epsilon, config.alpha);
  const auto n = static_cast<std::int64_t>(config.samples);

  if (config.skip_unattainable && stats::upper_confidence_bound(0, n, out.rho) > out.threshold) {
    out.unattainable = true;
    out.fell_back = true;
    out.selected_switch = previous_switch;
    return out;
  }

  BatchRequest request;
  request.loop = problem.loop();
  request.sampler = problem.sampler;
  request.theta_sampler = problem.theta_sampler ? problem.theta_sampler : &kExactTheta;
  request.x0 = x;
  request.time = t;
  request.candidates = config.candidates;
  request.horizon = config.horizon;
  request.samples = config.samples;
  request.gradient_samples = config.effective_gradient_samples();
  request.fd_step = config.fd_step;
  request.seed = seed;
  std::vector<RolloutBatch> batches = run_candidate_batches(request);

  out.lipschitz_estimated = !config.fixed_lipschitz.has_value();
  out.lipschitz_subsampled = out.lipschitz_estimated && request.gradient_samples < config.samples;
  for (const auto& batch : batches) {
    const double lipschitz = config.fixed_lipschitz ? *config.fixed_lipschitz
                                                    : estimate_lipschitz(batch);
    const std::size_t k = count_violations(batch.margins, lipschitz, config.beta);
    out.lipschitz.push_back(lipschitz);
    out.counts.push_back(k);
    out.bounds.push_back(stats::upper_confidence_bound(static_cast<std::int64_t>(k), n, out.rho));
    out.diverged_rollouts += batch.diverged_rollouts;
    out.diverged_gradients += batch.diverged_gradients;
  }
  if (batches_out) *batches_out = batches;
  out.feasible = feasible_candidates(out.bounds, out.threshold);
  out.fell_back = out.feasible.empty();
  out.selected_switch = select_switch(t, out.feasible, previous_switch);
  return out;
}

Gatekeeper::Gatekeeper(CertificationProblem problem, GatekeeperConfig config,
                       std::uint64_t seed, long start_time)
    : problem_(problem),
      config_(std::move(config)),
      seed_(seed),
      start_time_(start_time),
      committed_switch_(start_time) {
  config_.validate();
}

FilterStep Gatekeeper::step(long sim_time, const StateVector& x) {
  FilterStep result;
  const long elapsed = sim_time - start_time_;
  if (elapsed >= 0 && elapsed % static_cast<long>(config_.recertify_period) == 0) {
    CertificationOutcome outcome =
        certify(sim_time, x, committed_switch_, problem_, config_, seed_);
    committed_switch_ = outcome.selected_switch;
    result.outcome = std::move(outcome);
  }
  const SwitchedPolicy policy(*problem_.nominal, *problem_.backup, committed_switch_);
  result.backup_active = policy.uses_backup(sim_time);
  result.control = policy.act(x, sim_time);
  result.committed_switch = committed_switch_;
  return result;
}

}  // namespace drsgk
