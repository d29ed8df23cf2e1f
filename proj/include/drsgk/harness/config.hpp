#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drsgk/filter.hpp"

namespace drsgk::harness {

inline constexpr std::size_t kDefaultMaxSteps = 2000;

struct TrialSettings {
  std::size_t max_steps = kDefaultMaxSteps;
  std::uint64_t seed = 0;
};

/// Parameter axes a sweep may vary.
enum class SweepAxis { kEpsilon, kBeta, kSamples, kDelta };

SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis axis);

struct SweepSettings {
  SweepAxis axis = SweepAxis::kEpsilon;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
};

struct OutputSettings {
  bool trajectories = false;  ///< one CSV per trial
  bool diagnostics = true;    ///< per-invocation certification records
};

/*!
 * Full run description: scenario section, filter parameters, trial settings
 * and an optional sweep. to_yaml() emits the resolved form with every default
 * filled in, which is what the manifest records.
 */
struct RunConfig {
  std::string scenario_name = "dubins";
  YAML::Node scenario;  ///< resolved scenario section
  GatekeeperConfig gatekeeper;
  TrialSettings trial;
  std::optional<SweepSettings> sweep;
  OutputSettings output;

  static RunConfig from_yaml(const YAML::Node& root);
  /// Accepts a config file or a run manifest. Throws ConfigError for parse
  /// failures and IoError when unreadable.
  static RunConfig load(const std::filesystem::path& path);
  YAML::Node to_yaml() const;
};

GatekeeperConfig gatekeeper_from_yaml(const YAML::Node& node);
YAML::Node gatekeeper_to_yaml(const GatekeeperConfig& config);

/// Returns `base` with the sweep axis set to `value`.
GatekeeperConfig apply_axis(const GatekeeperConfig& base, SweepAxis axis, double value);

}  // namespace drsgk::harness
