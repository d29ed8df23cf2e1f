#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "drsgk/core.hpp"
#include "drsgk/filter.hpp"

namespace drsgk {

/*!
 * A configured plant: dynamics, both policies, the safety specification and
 * the two noise models (the nominal one the filter samples from and the true
 * one the simulator draws from).
 */
class Scenario {
 public:
  virtual ~Scenario() = default;

  virtual const SystemModel& model() const = 0;
  virtual const Policy& nominal_policy() const = 0;
  virtual const Policy& backup_policy() const = 0;
  virtual const SafetySpec& safety() const = 0;
  virtual const NoiseSampler& nominal_noise() const = 0;
  virtual const NoiseSampler& true_noise() const = 0;
  virtual const ThetaSampler* theta_sampler() const { return nullptr; }

  virtual StateVector initial_state() const = 0;
  virtual bool goal_reached(const StateVector& x) const = 0;
  /// Margin against the true unsafe set, used for safety accounting.
  virtual double true_margin(const StateVector& x) const {
    return safety().stage_margin(x, std::nullopt);
  }

  virtual std::vector<std::string> state_names() const = 0;
  virtual std::vector<std::string> control_names() const = 0;

  CertificationProblem problem() const {
    return {&model(), &nominal_policy(), &backup_policy(), &safety(), &nominal_noise(),
            theta_sampler()};
  }
};

/// Builds scenarios by name from their configuration section.
class ScenarioRegistry {
 public:
  /// Creates a scenario; `seed` drives any per-trial randomness (e.g. datasets).
  using Factory = std::function<std::unique_ptr<Scenario>(const YAML::Node&, std::uint64_t)>;
  /// Returns the section with every default filled in.
  using Resolver = std::function<YAML::Node(const YAML::Node&)>;

  static ScenarioRegistry& global();

  void add(const std::string& name, Factory factory, Resolver resolver);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  std::unique_ptr<Scenario> create(const std::string& name, const YAML::Node& section,
                                   std::uint64_t seed) const;
  YAML::Node resolve(const std::string& name, const YAML::Node& section) const;

 private:
  struct Entry {
    Factory factory;
    Resolver resolver;
  };
  const Entry& lookup(const std::string& name) const;
  std::map<std::string, Entry> entries_;
};

}  // namespace drsgk
