#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "drsgk/core.hpp"
#include "drsgk/rng.hpp"

namespace drsgk::dubins {

// State layout: [p_x, p_y, heading, speed]; control: [accel, turn rate];
// noise: [xi_a, xi_w, eta_a, eta_w].
enum StateIndex : std::size_t { kPx = 0, kPy = 1, kHeading = 2, kSpeed = 3 };
enum ControlIndex : std::size_t { kAccel = 0, kTurn = 1 };
enum NoiseIndex : std::size_t { kXiA = 0, kXiW = 1, kEtaA = 2, kEtaW = 3 };

inline constexpr std::size_t kStateDim = 4;
inline constexpr std::size_t kControlDim = 2;
inline constexpr std::size_t kNoiseDim = 4;

inline constexpr double kDefaultDt = 0.05;
inline constexpr double kDefaultMinSpeed = 10.0;
inline constexpr double kDefaultMaxAccel = 5.0;
inline constexpr double kDefaultMaxTurnRate = std::numbers::pi / 4.0;

struct Limits {
  double min_speed = kDefaultMinSpeed;
  double max_accel = kDefaultMaxAccel;
  double max_turn_rate = kDefaultMaxTurnRate;

  ControlBounds control_bounds() const {
    return {ControlVector{-max_accel, -max_turn_rate}, ControlVector{max_accel, max_turn_rate}};
  }
};

struct Obstacle {
  double x = 0.0;
  double y = 0.0;
  double radius = 1.0;
};

struct ObstacleField {
  std::vector<Obstacle> obstacles;
  double goal_x = 0.0;
  double goal_y = 0.0;
  double target_speed = 12.0;
};

/// Wrap to (-pi, pi].
double wrap_angle(double angle);

/// One explicit Euler step followed by the speed floor.
StateVector dubins_step(const StateVector& x, const ControlVector& u, const NoiseVector& w,
                        double dt, double min_speed = kDefaultMinSpeed);

/// min_i (|p - c_i|^2 - R_i^2); +inf for an empty field.
double obstacle_margin(const StateVector& x, const ObstacleField& field);

/// obstacle_margin - clearance^2.
double terminal_margin(const StateVector& x, const ObstacleField& field, double clearance);

/// Index of the obstacle with the smallest surface distance; first wins ties.
std::size_t nearest_obstacle(const StateVector& x, const ObstacleField& field);

/// Shortest orbit diameter, 2 v_min / omega_max.
inline double orbit_diameter(const Limits& limits) {
  return 2.0 * limits.min_speed / limits.max_turn_rate;
}

class DubinsModel final : public SystemModel {
 public:
  explicit DubinsModel(double dt = kDefaultDt, double min_speed = kDefaultMinSpeed)
      : dt_(dt), min_speed_(min_speed) {}

  std::size_t state_dim() const override { return kStateDim; }
  std::size_t control_dim() const override { return kControlDim; }
  std::size_t noise_dim() const override { return kNoiseDim; }
  double dt() const override { return dt_; }
  StateVector step(const StateVector& x, const ControlVector& u,
                   const NoiseVector& w) const override {
    return dubins_step(x, u, w, dt_, min_speed_);
  }

 private:
  double dt_;
  double min_speed_;
};

//---------------------------------------------------------------------------//
// Noise
//---------------------------------------------------------------------------//

struct GaussianComponent {
  double weight = 1.0;
  NoiseVector mean;
  NoiseVector stddev;
};

/// Two-component mixture with the published weights, means and deviations.
std::vector<GaussianComponent> default_noise_mixture();

/// Diagonal Gaussian mixture; the component is chosen with one uniform draw.
class GaussianMixtureNoise final : public NoiseSampler {
 public:
  explicit GaussianMixtureNoise(std::vector<GaussianComponent> components);

  std::size_t dim() const override { return dim_; }
  NoiseVector sample(const StateVector& x, const ControlVector& u,
                     RngStream& stream) const override;

  NoiseVector draw(RngStream& stream) const;
  NoiseVector draw_component(std::size_t component, RngStream& stream) const;

  NoiseVector mixture_mean() const;
  /// Full covariance of the mixture (row-major dim x dim).
  std::vector<double> mixture_covariance() const;
  const std::vector<GaussianComponent>& components() const { return components_; }

 private:
  std::vector<GaussianComponent> components_;
  std::size_t dim_;
};

/// Uniform resampling with replacement from a fixed dataset.
class EmpiricalNoise final : public NoiseSampler {
 public:
  explicit EmpiricalNoise(std::vector<NoiseVector> dataset);

  std::size_t dim() const override { return dataset_.front().size(); }
  NoiseVector sample(const StateVector& x, const ControlVector& u,
                     RngStream& stream) const override;

  NoiseVector resample(RngStream& stream) const;
  const std::vector<NoiseVector>& dataset() const { return dataset_; }

 private:
  std::vector<NoiseVector> dataset_;
};

/// K i.i.d. draws from the mixture; row r uses its own stream under `seed`.
std::vector<NoiseVector> draw_dataset(const GaussianMixtureNoise& mixture, std::size_t size,
                                      std::uint64_t seed);

//---------------------------------------------------------------------------//
// Policies and safety
//---------------------------------------------------------------------------//

struct NominalGains {
  double heading = 2.0;
  double speed = 1.0;
};

/// Proportional heading-to-goal and speed tracking.
class NominalPolicy final : public Policy {
 public:
  NominalPolicy(ObstacleField field, NominalGains gains, Limits limits = {});
  ControlVector act(const StateVector& x) const override;

 private:
  ObstacleField field_;
  NominalGains gains_;
  ControlBounds bounds_;
};

/// Decelerate to the speed floor and turn away from the nearest obstacle at full rate.
class BackupPolicy final : public Policy {
 public:
  BackupPolicy(ObstacleField field, double speed_gain, Limits limits = {});
  ControlVector act(const StateVector& x) const override;

 private:
  ObstacleField field_;
  double speed_gain_;
  Limits limits_;
  ControlBounds bounds_;
};

/// Circular-obstacle safe set with a clearance-inflated terminal set.
class ObstacleSafety final : public SafetySpec {
 public:
  ObstacleSafety(ObstacleField field, double clearance, double alpha = 0.0);

  double stage_margin(const StateVector& x, const ThetaHypothesis& theta) const override;
  double terminal_margin(const StateVector& x) const override;

  const ObstacleField& field() const { return field_; }
  double clearance() const { return clearance_; }

 private:
  ObstacleField field_;
  double clearance_;
};

}  // namespace drsgk::dubins
