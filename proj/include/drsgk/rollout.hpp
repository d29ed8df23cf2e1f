#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "drsgk/core.hpp"
#include "drsgk/rng.hpp"

namespace drsgk {

/// Process-noise rows for one rollout plus the unsafe-set hypothesis.
struct NoiseTrajectory {
  std::vector<NoiseVector> process;
  ThetaHypothesis theta;

  std::size_t horizon() const { return process.size(); }
  std::size_t theta_dim() const { return theta ? theta->size() : 0; }
  std::size_t noise_dim() const { return process.empty() ? 0 : process.front().size(); }
  /// v + T p
  std::size_t flat_dim() const { return theta_dim() + horizon() * noise_dim(); }

  /// Theta coordinates first, then row-major process noise.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
};

/// States x_t..x_{t+T} and the controls applied between them.
struct Trajectory {
  std::vector<StateVector> states;
  std::vector<ControlVector> controls;
};

/// Margins and gradient norms for one candidate switching offset.
struct RolloutBatch {
  std::size_t candidate = 0;
  std::vector<double> margins;         ///< H_T per sample, N entries
  std::vector<double> gradient_norms;  ///< gradient norm for samples 0..G-1
  std::size_t diverged_rollouts = 0;
  std::size_t diverged_gradients = 0;
};

struct GradientResult {
  double norm = 0.0;
  bool diverged = false;
};

/// Sentinel gradient norm for samples whose perturbed rollouts blow up.
inline constexpr double kDivergedGradient = 1e12;

/// Default central-difference step on each noise coordinate.
inline constexpr double kDefaultFdStep = 1e-4;

/*!
 * Iterate x' = f(x, u, w) for noise.horizon() steps.
 *
 * The control at relative step tau is policy.act(x, start_time + tau); noise
 * row tau is consumed at step tau whichever sub-policy is active. Throws
 * NumericalDivergence if a state entry becomes non-finite.
 */
Trajectory propagate(const SystemModel& model, const SwitchedPolicy& policy,
                     const StateVector& x0, const NoiseTrajectory& noise,
                     long start_time = 0);

/// min(h_c(x_T), min_tau h(x_tau, theta)), stage minimum including x_T.
double safety_margin(const Trajectory& traj, const ThetaHypothesis& theta,
                     const SafetySpec& spec);

using MarginFunction = std::function<double(std::span<const double>)>;

/*!
 * Euclidean norm of the central-difference gradient of `margin` at `point`,
 * perturbing each coordinate by +-step. Non-finite evaluations mark the result
 * diverged and return kDivergedGradient.
 */
GradientResult gradient_norm(const MarginFunction& margin,
                             std::span<const double> point, double step);

/// Lipschitz estimate: the largest sampled gradient norm.
double estimate_lipschitz(const RolloutBatch& batch);

/// Number of margins strictly below lipschitz * beta. NaN margins count.
std::size_t count_violations(std::span<const double> margins, double lipschitz,
                             double beta);

/// Everything a rollout needs besides the noise.
struct ClosedLoop {
  const SystemModel* model = nullptr;
  const Policy* nominal = nullptr;
  const Policy* backup = nullptr;
  const SafetySpec* safety = nullptr;
};

/*!
 * H_T as a function of the flattened noise for a fixed start state and
 * switching offset.
 *
 * gradient_norm() gives the same result as the generic central-difference
 * routine applied to evaluate(), but restarts each perturbed rollout from the
 * cached state at the perturbed step instead of from x0.
 */
class MarginMap {
 public:
  MarginMap(ClosedLoop loop, StateVector x0, long switch_offset,
            std::size_t horizon, std::size_t theta_dim);

  std::size_t flat_dim() const { return theta_dim_ + horizon_ * noise_dim_; }

  double evaluate(std::span<const double> flat) const;
  GradientResult gradient_norm(std::span<const double> flat, double step) const;

 private:
  ThetaHypothesis theta_of(std::span<const double> flat) const;
  double run_from(std::size_t tau, StateVector x, double prefix_min,
                  std::span<const double> flat, const ThetaHypothesis& theta) const;

  ClosedLoop loop_;
  StateVector x0_;
  long switch_offset_;
  std::size_t horizon_;
  std::size_t theta_dim_;
  std::size_t noise_dim_;
};

/// One sampled rollout with noise drawn sequentially along the trajectory.
struct SampledRollout {
  double margin = 0.0;
  bool diverged = false;
  NoiseTrajectory noise;  ///< filled only when recording was requested
};

SampledRollout sample_rollout(const ClosedLoop& loop, const NoiseSampler& sampler,
                              const ThetaSampler& theta_sampler,
                              const StateVector& x0, long switch_offset,
                              std::size_t horizon, RngStream& stream, bool record);

/// Parameters for evaluating a grid of candidate switching offsets.
struct BatchRequest {
  ClosedLoop loop;
  const NoiseSampler* sampler = nullptr;
  const ThetaSampler* theta_sampler = nullptr;
  StateVector x0;
  long time = 0;
  std::size_t candidates = 1;
  std::size_t horizon = 1;
  std::size_t samples = 1;
  std::size_t gradient_samples = 0;  ///< 0 disables gradient estimation
  double fd_step = kDefaultFdStep;
  std::uint64_t seed = 0;
};

/// Stream key for sample i of candidate m at time t.
StreamKey filter_sample_key(std::uint64_t seed, long time, std::size_t candidate,
                            std::size_t sample);

/*!
 * Evaluate all candidates: candidate m switches to backup at relative step m.
 *
 * The (m, i) grid runs in parallel; every sample draws from its own stream so
 * the result does not depend on scheduling or thread count.
 */
std::vector<RolloutBatch> run_candidate_batches(const BatchRequest& request);

}  // namespace drsgk
