#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "drsgk/scenarios/dubins.hpp"
#include "drsgk/scenarios/scenario.hpp"

namespace drsgk::dubins {

/// Default safety buffer added to the orbit diameter for the terminal set.
inline constexpr double kDefaultClearanceBuffer = 2.5;

struct DubinsScenarioConfig {
  double dt = kDefaultDt;
  Limits limits;
  StateVector start{0.0, 0.0, 0.0, 12.0};
  ObstacleField field{{{35.0, 3.0, 6.0}, {70.0, -4.0, 6.0}}, 100.0, 0.0, 12.0};
  double goal_radius = 1.0;
  NominalGains gains;
  double backup_speed_gain = 1.0;
  double clearance = orbit_diameter(Limits{}) + kDefaultClearanceBuffer;
  std::size_t dataset_size = 5000;
  std::vector<GaussianComponent> noise = default_noise_mixture();
  double alpha = 0.0;

  static DubinsScenarioConfig from_yaml(const YAML::Node& node);
  YAML::Node to_yaml() const;
};

class DubinsScenario final : public Scenario {
 public:
  /// The empirical dataset is drawn from the mixture under `seed`.
  DubinsScenario(DubinsScenarioConfig config, std::uint64_t seed);

  const SystemModel& model() const override { return model_; }
  const Policy& nominal_policy() const override { return nominal_; }
  const Policy& backup_policy() const override { return backup_; }
  const SafetySpec& safety() const override { return safety_; }
  const NoiseSampler& nominal_noise() const override { return empirical_; }
  const NoiseSampler& true_noise() const override { return mixture_; }

  StateVector initial_state() const override { return config_.start; }
  bool goal_reached(const StateVector& x) const override;

  std::vector<std::string> state_names() const override {
    return {"p_x", "p_y", "heading", "speed"};
  }
  std::vector<std::string> control_names() const override { return {"u_accel", "u_turn"}; }

  const DubinsScenarioConfig& config() const { return config_; }
  const GaussianMixtureNoise& mixture() const { return mixture_; }
  const EmpiricalNoise& empirical() const { return empirical_; }

 private:
  DubinsScenarioConfig config_;
  DubinsModel model_;
  NominalPolicy nominal_;
  BackupPolicy backup_;
  ObstacleSafety safety_;
  GaussianMixtureNoise mixture_;
  EmpiricalNoise empirical_;
};

/// Registers "dubins" with the global registry (idempotent).
void register_dubins();

}  // namespace drsgk::dubins
