#include "drsgk/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drsgk/parallel.hpp"

namespace drsgk {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const Policy& active_policy(const ClosedLoop& loop, std::size_t step, long switch_offset) {
  return static_cast<long>(step) < switch_offset ? *loop.nominal : *loop.backup;
}

}  // namespace

//---------------------------------------------------------------------------//
// NoiseTrajectory
//---------------------------------------------------------------------------//

std::vector<double> NoiseTrajectory::flatten() const {
  std::vector<double> flat;
  flat.reserve(flat_dim());
  if (theta) flat.insert(flat.end(), theta->begin(), theta->end());
  for (const auto& row : process) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

void NoiseTrajectory::assign_flat(std::span<const double> flat) {
  if (flat.size() != flat_dim()) {
    throw DomainError("assign_flat: expected " + std::to_string(flat_dim()) +
                      " coordinates, got " + std::to_string(flat.size()));
  }
  std::size_t pos = 0;
  if (theta) {
    for (auto& v : *theta) v = flat[pos++];
  }
  for (auto& row : process) {
    for (auto& v : row) v = flat[pos++];
  }
}

//---------------------------------------------------------------------------//
// Propagation and the finite-horizon safety function
//---------------------------------------------------------------------------//

Trajectory propagate(const SystemModel& model, const SwitchedPolicy& policy,
                     const StateVector& x0, const NoiseTrajectory& noise,
                     long start_time) {
  if (!x0.all_finite()) throw NumericalDivergence("propagate: initial state is not finite");
  Trajectory traj;
  traj.states.reserve(noise.horizon() + 1);
  traj.controls.reserve(noise.horizon());
  traj.states.push_back(x0);
  for (std::size_t tau = 0; tau < noise.horizon(); ++tau) {
    const StateVector& x = traj.states.back();
    ControlVector u = switched_act(policy, x, start_time + static_cast<long>(tau));
    StateVector next = model.step(x, u, noise.process[tau]);
    if (!next.all_finite()) {
      throw NumericalDivergence("propagate: state diverged at step " + std::to_string(tau + 1));
    }
    traj.controls.push_back(u);
    traj.states.push_back(next);
  }
  return traj;
}

double safety_margin(const Trajectory& traj, const ThetaHypothesis& theta,
                     const SafetySpec& spec) {
  double margin = spec.terminal_margin(traj.states.back());
  for (const auto& x : traj.states) margin = std::min(margin, spec.stage_margin(x, theta));
  return margin;
}

//---------------------------------------------------------------------------//
// Gradient, Lipschitz estimate, counting
//---------------------------------------------------------------------------//

GradientResult gradient_norm(const MarginFunction& margin,
                             std::span<const double> point, double step) {
  if (!(step > 0.0)) throw DomainError("gradient_norm: step must be positive");
  std::vector<double> probe(point.begin(), point.end());
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < probe.size(); ++j) {
    const double original = probe[j];
    probe[j] = original + step;
    const double plus = margin(probe);
    probe[j] = original - step;
    const double minus = margin(probe);
    probe[j] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus)) return {kDivergedGradient, true};
    const double g = (plus - minus) / (2.0 * step);
    sum_sq += g * g;
  }
  return {std::sqrt(sum_sq), false};
}

double estimate_lipschitz(const RolloutBatch& batch) {
  if (batch.gradient_norms.empty()) {
    throw DomainError("estimate_lipschitz: batch has no gradient samples");
  }
  return *std::max_element(batch.gradient_norms.begin(), batch.gradient_norms.end());
}

std::size_t count_violations(std::span<const double> margins, double lipschitz,
                             double beta) {
  if (!(lipschitz >= 0.0)) throw DomainError("count_violations: lipschitz must be >= 0");
  if (!(beta >= 0.0)) throw DomainError("count_violations: beta must be >= 0");
  const double threshold = lipschitz * beta;
  return static_cast<std::size_t>(std::count_if(
      margins.begin(), margins.end(), [threshold](double h) { return !(h >= threshold); }));
}

//---------------------------------------------------------------------------//
// MarginMap
//---------------------------------------------------------------------------//

MarginMap::MarginMap(ClosedLoop loop, StateVector x0, long switch_offset,
                     std::size_t horizon, std::size_t theta_dim)
    : loop_(loop),
      x0_(x0),
      switch_offset_(switch_offset),
      horizon_(horizon),
      theta_dim_(theta_dim),
      noise_dim_(loop.model->noise_dim()) {}

ThetaHypothesis MarginMap::theta_of(std::span<const double> flat) const {
  if (theta_dim_ == 0) return std::nullopt;
  return ParamVector(flat.first(theta_dim_));
}

double MarginMap::run_from(std::size_t tau, StateVector x, double prefix_min,
                           std::span<const double> flat,
                           const ThetaHypothesis& theta) const {
  const SafetySpec& safety = *loop_.safety;
  double margin = prefix_min;
  for (std::size_t s = tau; s < horizon_; ++s) {
    margin = std::min(margin, safety.stage_margin(x, theta));
    const ControlVector u = active_policy(loop_, s, switch_offset_).act(x);
    const NoiseVector w(flat.subspan(theta_dim_ + s * noise_dim_, noise_dim_));
    x = loop_.model->step(x, u, w);
    if (!x.all_finite()) return -kInf;
  }
  margin = std::min(margin, safety.stage_margin(x, theta));
  return std::min(margin, safety.terminal_margin(x));
}

double MarginMap::evaluate(std::span<const double> flat) const {
  if (flat.size() != flat_dim()) throw DomainError("MarginMap: noise dimension mismatch");
  return run_from(0, x0_, kInf, flat, theta_of(flat));
}

GradientResult MarginMap::gradient_norm(std::span<const double> flat, double step) const {
  if (!(step > 0.0)) throw DomainError("gradient_norm: step must be positive");
  if (flat.size() != flat_dim()) throw DomainError("MarginMap: noise dimension mismatch");

  // Cache the nominal pass: states and running stage minima before each step.
  const ThetaHypothesis theta = theta_of(flat);
  std::vector<StateVector> states(horizon_ + 1);
  std::vector<double> prefix(horizon_ + 1);
  states[0] = x0_;
  prefix[0] = kInf;
  for (std::size_t s = 0; s < horizon_; ++s) {
    const StateVector& x = states[s];
    prefix[s + 1] = std::min(prefix[s], loop_.safety->stage_margin(x, theta));
    const ControlVector u = active_policy(loop_, s, switch_offset_).act(x);
    states[s + 1] =
        loop_.model->step(x, u, NoiseVector(flat.subspan(theta_dim_ + s * noise_dim_, noise_dim_)));
    if (!states[s + 1].all_finite()) return {kDivergedGradient, true};
  }

  std::vector<double> probe(flat.begin(), flat.end());
  double sum_sq = 0.0;
  auto accumulate = [&](double plus, double minus) {
    if (!std::isfinite(plus) || !std::isfinite(minus)) return false;
    const double g = (plus - minus) / (2.0 * step);
    sum_sq += g * g;
    return true;
  };

  for (std::size_t j = 0; j < theta_dim_; ++j) {
    const double original = probe[j];
    probe[j] = original + step;
    const double plus = run_from(0, x0_, kInf, probe, theta_of(probe));
    probe[j] = original - step;
    const double minus = run_from(0, x0_, kInf, probe, theta_of(probe));
    probe[j] = original;
    if (!accumulate(plus, minus)) return {kDivergedGradient, true};
  }
  for (std::size_t s = 0; s < horizon_; ++s) {
    for (std::size_t c = 0; c < noise_dim_; ++c) {
      const std::size_t j = theta_dim_ + s * noise_dim_ + c;
      const double original = probe[j];
      probe[j] = original + step;
      const double plus = run_from(s, states[s], prefix[s], probe, theta);
      probe[j] = original - step;
      const double minus = run_from(s, states[s], prefix[s], probe, theta);
      probe[j] = original;
      if (!accumulate(plus, minus)) return {kDivergedGradient, true};
    }
  }
  return {std::sqrt(sum_sq), false};
}

//---------------------------------------------------------------------------//
// Sampling
//---------------------------------------------------------------------------//

SampledRollout sample_rollout(const ClosedLoop& loop, const NoiseSampler& sampler,
                              const ThetaSampler& theta_sampler,
                              const StateVector& x0, long switch_offset,
                              std::size_t horizon, RngStream& stream, bool record) {
  SampledRollout out;
  const ThetaHypothesis theta = theta_sampler.sample(x0, stream);
  if (record) {
    out.noise.theta = theta;
    out.noise.process.reserve(horizon);
  }
  const SafetySpec& safety = *loop.safety;
  StateVector x = x0;
  double margin = kInf;
  for (std::size_t s = 0; s < horizon; ++s) {
    margin = std::min(margin, safety.stage_margin(x, theta));
    const ControlVector u = active_policy(loop, s, switch_offset).act(x);
    const NoiseVector w = sampler.sample(x, u, stream);
    if (record) out.noise.process.push_back(w);
    x = loop.model->step(x, u, w);
    if (!x.all_finite()) {
      out.diverged = true;
      out.margin = -kInf;
      return out;
    }
  }
  margin = std::min(margin, safety.stage_margin(x, theta));
  out.margin = std::min(margin, safety.terminal_margin(x));
  return out;
}

StreamKey filter_sample_key(std::uint64_t seed, long time, std::size_t candidate,
                            std::size_t sample) {
  StreamKey key;
  key.seed = seed;
  key.time = static_cast<std::uint32_t>(time);
  key.candidate = static_cast<std::uint16_t>(candidate);
  key.sample = static_cast<std::uint32_t>(sample);
  key.channel = Channel::kFilterSample;
  return key;
}

std::vector<RolloutBatch> run_candidate_batches(const BatchRequest& request) {
  if (request.candidates == 0 || request.samples == 0) {
    throw DomainError("run_candidate_batches: need at least one candidate and one sample");
  }
  if (request.candidates > 0xFFFF) throw DomainError("run_candidate_batches: too many candidates");
  if (request.gradient_samples > request.samples) {
    throw DomainError("run_candidate_batches: gradient_samples exceeds samples");
  }
  const std::size_t n = request.samples;
  const std::size_t g = request.gradient_samples;
  const std::size_t theta_dim = request.theta_sampler->dim();

  std::vector<RolloutBatch> batches(request.candidates);
  std::vector<std::vector<GradientResult>> gradients(request.candidates);
  for (std::size_t m = 0; m < request.candidates; ++m) {
    batches[m].candidate = m;
    batches[m].margins.assign(n, 0.0);
    gradients[m].assign(g, GradientResult{});
  }

  parallel_for(request.candidates * n, [&](std::size_t flat_index) {
    const std::size_t m = flat_index / n;
    const std::size_t i = flat_index % n;
    RngStream stream(filter_sample_key(request.seed, request.time, m, i));
    const bool want_gradient = i < g;
    SampledRollout rollout =
        sample_rollout(request.loop, *request.sampler, *request.theta_sampler, request.x0,
                       static_cast<long>(m), request.horizon, stream, want_gradient);
    batches[m].margins[i] = rollout.margin;
    if (!want_gradient) return;
    if (rollout.diverged) {
      gradients[m][i] = {kDivergedGradient, true};
      return;
    }
    const MarginMap map(request.loop, request.x0, static_cast<long>(m), request.horizon,
                        theta_dim);
    const std::vector<double> flat = rollout.noise.flatten();
    gradients[m][i] = map.gradient_norm(flat, request.fd_step);
  });

  for (std::size_t m = 0; m < request.candidates; ++m) {
    auto& batch = batches[m];
    batch.diverged_rollouts = static_cast<std::size_t>(std::count_if(
        batch.margins.begin(), batch.margins.end(), [](double h) { return h == -kInf; }));
    batch.gradient_norms.reserve(g);
    for (const auto& grad : gradients[m]) {
      batch.gradient_norms.push_back(grad.norm);
      if (grad.diverged) ++batch.diverged_gradients;
    }
  }
  return batches;
}

}  // namespace drsgk
