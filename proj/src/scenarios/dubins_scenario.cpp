#include "drsgk/scenarios/dubins_scenario.hpp"

#include <cmath>
#include <mutex>

#include "drsgk/yaml_util.hpp"

namespace drsgk::dubins {
namespace {

constexpr const char* kSection = "scenario";

}  // namespace

DubinsScenarioConfig DubinsScenarioConfig::from_yaml(const YAML::Node& node) {
  using yaml::get_or;
  using yaml::get_reals;
  yaml::require_known_keys(node,
                           {"name", "dt", "min_speed", "max_accel", "max_turn_rate", "start",
                            "goal", "goal_radius", "target_speed", "obstacles", "gains",
                            "clearance", "dataset_size", "noise", "alpha"},
                           kSection);
  DubinsScenarioConfig cfg;
  cfg.dt = get_or(node, "dt", cfg.dt, kSection);
  cfg.limits.min_speed = get_or(node, "min_speed", cfg.limits.min_speed, kSection);
  cfg.limits.max_accel = get_or(node, "max_accel", cfg.limits.max_accel, kSection);
  cfg.limits.max_turn_rate = get_or(node, "max_turn_rate", cfg.limits.max_turn_rate, kSection);

  const auto start = get_reals(node, "start", {cfg.start.begin(), cfg.start.end()}, kSection,
                               kStateDim);
  cfg.start = StateVector(std::span<const double>(start));
  const auto goal = get_reals(node, "goal", {cfg.field.goal_x, cfg.field.goal_y}, kSection, 2);
  cfg.field.goal_x = goal[0];
  cfg.field.goal_y = goal[1];
  cfg.goal_radius = get_or(node, "goal_radius", cfg.goal_radius, kSection);
  cfg.field.target_speed = get_or(node, "target_speed", cfg.field.target_speed, kSection);

  if (const YAML::Node obstacles = node["obstacles"]; obstacles && !obstacles.IsNull()) {
    if (!obstacles.IsSequence()) throw ConfigError("scenario.obstacles: expected a list");
    cfg.field.obstacles.clear();
    for (const auto& item : obstacles) {
      yaml::require_known_keys(item, {"x", "y", "radius"}, "scenario.obstacles[]");
      Obstacle ob;
      ob.x = get_or(item, "x", 0.0, "scenario.obstacles[]");
      ob.y = get_or(item, "y", 0.0, "scenario.obstacles[]");
      ob.radius = get_or(item, "radius", 0.0, "scenario.obstacles[]");
      cfg.field.obstacles.push_back(ob);
    }
  }

  if (const YAML::Node gains = node["gains"]; gains && !gains.IsNull()) {
    yaml::require_known_keys(gains, {"heading", "speed", "backup_speed"}, "scenario.gains");
    cfg.gains.heading = get_or(gains, "heading", cfg.gains.heading, "scenario.gains");
    cfg.gains.speed = get_or(gains, "speed", cfg.gains.speed, "scenario.gains");
    cfg.backup_speed_gain =
        get_or(gains, "backup_speed", cfg.backup_speed_gain, "scenario.gains");
  }

  // Clearance defaults to the orbit diameter for the configured limits plus a buffer.
  cfg.clearance = get_or(node, "clearance", orbit_diameter(cfg.limits) + kDefaultClearanceBuffer,
                         kSection);
  cfg.dataset_size = get_or(node, "dataset_size", cfg.dataset_size, kSection);
  cfg.alpha = get_or(node, "alpha", cfg.alpha, kSection);

  if (const YAML::Node noise = node["noise"]; noise && !noise.IsNull()) {
    if (!noise.IsSequence()) throw ConfigError("scenario.noise: expected a list of components");
    cfg.noise.clear();
    for (const auto& item : noise) {
      const std::string where = "scenario.noise[]";
      yaml::require_known_keys(item, {"weight", "mean", "std"}, where);
      GaussianComponent c;
      c.weight = get_or(item, "weight", 0.0, where);
      const auto mean = get_reals(item, "mean", {}, where, kNoiseDim);
      const auto sd = get_reals(item, "std", {}, where, kNoiseDim);
      c.mean = NoiseVector(std::span<const double>(mean));
      c.stddev = NoiseVector(std::span<const double>(sd));
      cfg.noise.push_back(c);
    }
  }

  if (!(cfg.dt > 0.0)) throw ConfigError("scenario.dt must be positive");
  if (!(cfg.goal_radius > 0.0)) throw ConfigError("scenario.goal_radius must be positive");
  if (!(cfg.clearance > 0.0)) throw ConfigError("scenario.clearance must be positive");
  if (cfg.dataset_size < 1) throw ConfigError("scenario.dataset_size must be >= 1");
  if (!(cfg.alpha >= 0.0)) throw ConfigError("scenario.alpha must be >= 0");
  for (const auto& ob : cfg.field.obstacles) {
    if (!(ob.radius > 0.0)) throw ConfigError("scenario.obstacles: radius must be positive");
  }
  return cfg;
}

YAML::Node DubinsScenarioConfig::to_yaml() const {
  YAML::Node node;
  node["name"] = "dubins";
  node["dt"] = dt;
  node["min_speed"] = limits.min_speed;
  node["max_accel"] = limits.max_accel;
  node["max_turn_rate"] = limits.max_turn_rate;
  node["start"] = yaml::sequence(start.begin(), start.end());
  const double goal[] = {field.goal_x, field.goal_y};
  node["goal"] = yaml::sequence(goal, goal + 2);
  node["goal_radius"] = goal_radius;
  node["target_speed"] = field.target_speed;
  YAML::Node obstacles(YAML::NodeType::Sequence);
  for (const auto& ob : field.obstacles) {
    YAML::Node item;
    item["x"] = ob.x;
    item["y"] = ob.y;
    item["radius"] = ob.radius;
    item.SetStyle(YAML::EmitterStyle::Flow);
    obstacles.push_back(item);
  }
  node["obstacles"] = obstacles;
  YAML::Node g;
  g["heading"] = gains.heading;
  g["speed"] = gains.speed;
  g["backup_speed"] = backup_speed_gain;
  node["gains"] = g;
  node["clearance"] = clearance;
  node["dataset_size"] = dataset_size;
  node["alpha"] = alpha;
  YAML::Node components(YAML::NodeType::Sequence);
  for (const auto& c : noise) {
    YAML::Node item;
    item["weight"] = c.weight;
    item["mean"] = yaml::sequence(c.mean.begin(), c.mean.end());
    item["std"] = yaml::sequence(c.stddev.begin(), c.stddev.end());
    components.push_back(item);
  }
  node["noise"] = components;
  return node;
}

DubinsScenario::DubinsScenario(DubinsScenarioConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      model_(config_.dt, config_.limits.min_speed),
      nominal_(config_.field, config_.gains, config_.limits),
      backup_(config_.field, config_.backup_speed_gain, config_.limits),
      safety_(config_.field, config_.clearance, config_.alpha),
      mixture_(config_.noise),
      empirical_(draw_dataset(mixture_, config_.dataset_size, seed)) {}

bool DubinsScenario::goal_reached(const StateVector& x) const {
  return std::hypot(x[kPx] - config_.field.goal_x, x[kPy] - config_.field.goal_y) <=
         config_.goal_radius;
}

void register_dubins() {
  static std::once_flag once;
  std::call_once(once, [] {
    ScenarioRegistry::global().add(
        "dubins",
        [](const YAML::Node& node, std::uint64_t seed) -> std::unique_ptr<Scenario> {
          return std::make_unique<DubinsScenario>(DubinsScenarioConfig::from_yaml(node), seed);
        },
        [](const YAML::Node& node) { return DubinsScenarioConfig::from_yaml(node).to_yaml(); });
  });
}

}  // namespace drsgk::dubins
