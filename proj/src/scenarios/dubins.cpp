#include "drsgk/scenarios/dubins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace drsgk::dubins {

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, two_pi);
  if (wrapped <= -std::numbers::pi) wrapped += two_pi;
  return wrapped;
}

StateVector dubins_step(const StateVector& x, const ControlVector& u, const NoiseVector& w,
                        double dt, double min_speed) {
  const double heading = x[kHeading];
  const double speed = x[kSpeed];
  StateVector next(kStateDim);
  next[kPx] = x[kPx] + dt * speed * std::cos(heading);
  next[kPy] = x[kPy] + dt * speed * std::sin(heading);
  next[kHeading] = heading + dt * ((1.0 + w[kEtaW]) * u[kTurn] + speed * w[kXiW]);
  next[kSpeed] = speed + dt * ((1.0 + w[kEtaA]) * u[kAccel] + speed * w[kXiA]);
  // Comparison form keeps NaN visible to the divergence check.
  if (next[kSpeed] < min_speed) next[kSpeed] = min_speed;
  return next;
}

double obstacle_margin(const StateVector& x, const ObstacleField& field) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& ob : field.obstacles) {
    const double dx = x[kPx] - ob.x;
    const double dy = x[kPy] - ob.y;
    margin = std::min(margin, dx * dx + dy * dy - ob.radius * ob.radius);
  }
  return margin;
}

double terminal_margin(const StateVector& x, const ObstacleField& field, double clearance) {
  if (!(clearance > 0.0)) throw DomainError("terminal_margin: clearance must be positive");
  return obstacle_margin(x, field) - clearance * clearance;
}

std::size_t nearest_obstacle(const StateVector& x, const ObstacleField& field) {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.obstacles.size(); ++i) {
    const auto& ob = field.obstacles[i];
    const double surface = std::hypot(x[kPx] - ob.x, x[kPy] - ob.y) - ob.radius;
    if (surface < best_distance) {
      best_distance = surface;
      best = i;
    }
  }
  return best;
}

//---------------------------------------------------------------------------//
// Noise
//---------------------------------------------------------------------------//

std::vector<GaussianComponent> default_noise_mixture() {
  return {
      {0.8, NoiseVector{0.0, 0.0, 0.0, 0.0}, NoiseVector{0.05, 0.02, 0.03, 0.03}},
      {0.2, NoiseVector{-0.15, 0.08, -0.10, 0.05}, NoiseVector{0.02, 0.01, 0.05, 0.05}},
  };
}

GaussianMixtureNoise::GaussianMixtureNoise(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("GaussianMixtureNoise: no components");
  dim_ = components_.front().mean.size();
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.stddev.size() != dim_) {
      throw DomainError("GaussianMixtureNoise: inconsistent component dimensions");
    }
    if (!(c.weight > 0.0)) throw DomainError("GaussianMixtureNoise: weights must be positive");
    for (double s : c.stddev) {
      if (!(s >= 0.0)) throw DomainError("GaussianMixtureNoise: negative deviation");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("GaussianMixtureNoise: weights must sum to 1");
}

NoiseVector GaussianMixtureNoise::sample(const StateVector&, const ControlVector&,
                                         RngStream& stream) const {
  return draw(stream);
}

NoiseVector GaussianMixtureNoise::draw(RngStream& stream) const {
  const double u = stream.uniform();
  double cumulative = 0.0;
  std::size_t chosen = components_.size() - 1;
  for (std::size_t c = 0; c + 1 < components_.size(); ++c) {
    cumulative += components_[c].weight;
    if (u < cumulative) {
      chosen = c;
      break;
    }
  }
  return draw_component(chosen, stream);
}

NoiseVector GaussianMixtureNoise::draw_component(std::size_t component, RngStream& stream) const {
  const auto& c = components_.at(component);
  NoiseVector w(dim_);
  for (std::size_t d = 0; d < dim_; ++d) w[d] = c.mean[d] + c.stddev[d] * stream.normal();
  return w;
}

NoiseVector GaussianMixtureNoise::mixture_mean() const {
  NoiseVector mean(dim_);
  for (const auto& c : components_) {
    for (std::size_t d = 0; d < dim_; ++d) mean[d] += c.weight * c.mean[d];
  }
  return mean;
}

std::vector<double> GaussianMixtureNoise::mixture_covariance() const {
  const NoiseVector mean = mixture_mean();
  std::vector<double> cov(dim_ * dim_, 0.0);
  for (const auto& c : components_) {
    for (std::size_t a = 0; a < dim_; ++a) {
      for (std::size_t b = 0; b < dim_; ++b) {
        double term = (c.mean[a] - mean[a]) * (c.mean[b] - mean[b]);
        if (a == b) term += c.stddev[a] * c.stddev[a];
        cov[a * dim_ + b] += c.weight * term;
      }
    }
  }
  return cov;
}

EmpiricalNoise::EmpiricalNoise(std::vector<NoiseVector> dataset) : dataset_(std::move(dataset)) {
  if (dataset_.empty()) throw DomainError("EmpiricalNoise: empty dataset");
}

NoiseVector EmpiricalNoise::sample(const StateVector&, const ControlVector&,
                                   RngStream& stream) const {
  return resample(stream);
}

NoiseVector EmpiricalNoise::resample(RngStream& stream) const {
  return dataset_[stream.uniform_below(dataset_.size())];
}

std::vector<NoiseVector> draw_dataset(const GaussianMixtureNoise& mixture, std::size_t size,
                                      std::uint64_t seed) {
  std::vector<NoiseVector> rows;
  rows.reserve(size);
  for (std::size_t r = 0; r < size; ++r) {
    StreamKey key;
    key.seed = seed;
    key.sample = static_cast<std::uint32_t>(r);
    key.channel = Channel::kDataset;
    RngStream stream(key);
    rows.push_back(mixture.draw(stream));
  }
  return rows;
}

//---------------------------------------------------------------------------//
// Policies and safety
//---------------------------------------------------------------------------//

NominalPolicy::NominalPolicy(ObstacleField field, NominalGains gains, Limits limits)
    : field_(std::move(field)), gains_(gains), bounds_(limits.control_bounds()) {}

ControlVector NominalPolicy::act(const StateVector& x) const {
  const double bearing = std::atan2(field_.goal_y - x[kPy], field_.goal_x - x[kPx]);
  const double heading_error = wrap_angle(bearing - x[kHeading]);
  return bounds_.clamp(ControlVector{gains_.speed * (field_.target_speed - x[kSpeed]),
                                     gains_.heading * heading_error});
}

BackupPolicy::BackupPolicy(ObstacleField field, double speed_gain, Limits limits)
    : field_(std::move(field)),
      speed_gain_(speed_gain),
      limits_(limits),
      bounds_(limits.control_bounds()) {}

ControlVector BackupPolicy::act(const StateVector& x) const {
  const double accel = speed_gain_ * (limits_.min_speed - x[kSpeed]);
  if (field_.obstacles.empty()) return bounds_.clamp(ControlVector{accel, 0.0});
  const auto& ob = field_.obstacles[nearest_obstacle(x, field_)];
  // Positive cross product: obstacle on the left, so turn right.
  const double cross = std::cos(x[kHeading]) * (ob.y - x[kPy]) -
                       std::sin(x[kHeading]) * (ob.x - x[kPx]);
  const double turn = cross > 0.0 ? -limits_.max_turn_rate : limits_.max_turn_rate;
  return bounds_.clamp(ControlVector{accel, turn});
}

ObstacleSafety::ObstacleSafety(ObstacleField field, double clearance, double alpha)
    : SafetySpec(alpha), field_(std::move(field)), clearance_(clearance) {
  if (!(clearance > 0.0)) throw DomainError("ObstacleSafety: clearance must be positive");
  for (const auto& ob : field_.obstacles) {
    if (!(ob.radius > 0.0)) throw DomainError("ObstacleSafety: obstacle radius must be positive");
  }
}

double ObstacleSafety::stage_margin(const StateVector& x, const ThetaHypothesis& theta) const {
  if (!theta) return obstacle_margin(x, field_);
  // Hypothesis layout: (x, y, radius) per obstacle.
  if (theta->size() != 3 * field_.obstacles.size()) {
    throw DomainError("ObstacleSafety: theta must hold 3 values per obstacle");
  }
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field_.obstacles.size(); ++i) {
    const double dx = x[kPx] - (*theta)[3 * i];
    const double dy = x[kPy] - (*theta)[3 * i + 1];
    const double r = (*theta)[3 * i + 2];
    margin = std::min(margin, dx * dx + dy * dy - r * r);
  }
  return margin;
}

double ObstacleSafety::terminal_margin(const StateVector& x) const {
  return dubins::terminal_margin(x, field_, clearance_);
}

}  // namespace drsgk::dubins
