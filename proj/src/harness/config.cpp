#include "drsgk/harness/config.hpp"

#include <cmath>
#include <fstream>

#include "drsgk/scenarios/dubins_scenario.hpp"
#include "drsgk/yaml_util.hpp"

namespace drsgk::harness {

using yaml::get_or;

SweepAxis parse_axis(const std::string& name) {
  if (name == "epsilon") return SweepAxis::kEpsilon;
  if (name == "beta") return SweepAxis::kBeta;
  if (name == "N" || name == "samples") return SweepAxis::kSamples;
  if (name == "delta") return SweepAxis::kDelta;
  throw ConfigError("sweep.axis: unknown axis '" + name + "' (epsilon | beta | N | delta)");
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kEpsilon: return "epsilon";
    case SweepAxis::kBeta: return "beta";
    case SweepAxis::kSamples: return "N";
    case SweepAxis::kDelta: return "delta";
  }
  return "?";
}

GatekeeperConfig gatekeeper_from_yaml(const YAML::Node& node) {
  const std::string s = "gatekeeper";
  yaml::require_known_keys(node,
                           {"candidates", "horizon", "samples", "delta", "epsilon", "beta",
                            "alpha", "fixed_lipschitz", "fd_step", "gradient_samples",
                            "recertify_period", "skip_unattainable"},
                           s);
  GatekeeperConfig c;
  if (!node || node.IsNull()) return c;
  c.candidates = get_or(node, "candidates", c.candidates, s);
  c.horizon = get_or(node, "horizon", c.horizon, s);
  c.samples = get_or(node, "samples", c.samples, s);
  c.delta = get_or(node, "delta", c.delta, s);
  c.epsilon = get_or(node, "epsilon", c.epsilon, s);
  c.beta = get_or(node, "beta", c.beta, s);
  c.alpha = get_or(node, "alpha", c.alpha, s);
  if (node["fixed_lipschitz"] && !node["fixed_lipschitz"].IsNull()) {
    c.fixed_lipschitz = get_or(node, "fixed_lipschitz", 0.0, s);
  }
  c.fd_step = get_or(node, "fd_step", c.fd_step, s);
  if (node["gradient_samples"] && !node["gradient_samples"].IsNull()) {
    c.gradient_samples = get_or(node, "gradient_samples", std::size_t{0}, s);
  }
  c.recertify_period = get_or(node, "recertify_period", c.recertify_period, s);
  c.skip_unattainable = get_or(node, "skip_unattainable", c.skip_unattainable, s);
  return c;
}

YAML::Node gatekeeper_to_yaml(const GatekeeperConfig& c) {
  YAML::Node n;
  n["candidates"] = c.candidates;
  n["horizon"] = c.horizon;
  n["samples"] = c.samples;
  n["delta"] = c.delta;
  n["epsilon"] = c.epsilon;
  n["beta"] = c.beta;
  n["alpha"] = c.alpha;
  if (c.fixed_lipschitz) {
    n["fixed_lipschitz"] = *c.fixed_lipschitz;
  } else {
    n["fixed_lipschitz"] = YAML::Null;
  }
  n["fd_step"] = c.fd_step;
  if (c.gradient_samples) {
    n["gradient_samples"] = *c.gradient_samples;
  } else {
    n["gradient_samples"] = YAML::Null;
  }
  n["recertify_period"] = c.recertify_period;
  n["skip_unattainable"] = c.skip_unattainable;
  return n;
}

GatekeeperConfig apply_axis(const GatekeeperConfig& base, SweepAxis axis, double value) {
  GatekeeperConfig c = base;
  switch (axis) {
    case SweepAxis::kEpsilon: c.epsilon = value; break;
    case SweepAxis::kBeta: c.beta = value; break;
    case SweepAxis::kDelta: c.delta = value; break;
    case SweepAxis::kSamples:
      if (!(value >= 1.0) || value != std::floor(value) || value > 1e12) {
        throw ConfigError("sweep: N values must be positive integers");
      }
      c.samples = static_cast<std::size_t>(value);
      break;
  }
  return c;
}

RunConfig RunConfig::from_yaml(const YAML::Node& root) {
  dubins::register_dubins();
  if (!root || !root.IsMap()) throw ConfigError("config: expected a mapping at top level");
  yaml::require_known_keys(root, {"scenario", "gatekeeper", "trial", "sweep", "output"}, "config");

  RunConfig cfg;
  const YAML::Node given = root["scenario"];
  const YAML::Node scenario =
      given && !given.IsNull() ? given : YAML::Node(YAML::NodeType::Map);
  if (!scenario.IsMap()) throw ConfigError("scenario: expected a mapping");
  cfg.scenario_name = get_or(scenario, "name", cfg.scenario_name, "scenario");
  cfg.scenario = ScenarioRegistry::global().resolve(cfg.scenario_name, scenario);

  cfg.gatekeeper = gatekeeper_from_yaml(root["gatekeeper"]);
  cfg.gatekeeper.validate();

  if (const YAML::Node trial = root["trial"]; trial && !trial.IsNull()) {
    yaml::require_known_keys(trial, {"max_steps", "seed"}, "trial");
    cfg.trial.max_steps = get_or(trial, "max_steps", cfg.trial.max_steps, "trial");
    cfg.trial.seed = get_or(trial, "seed", cfg.trial.seed, "trial");
  }
  if (cfg.trial.max_steps < 1) throw ConfigError("trial.max_steps must be >= 1");

  if (const YAML::Node sweep = root["sweep"]; sweep && !sweep.IsNull()) {
    yaml::require_known_keys(sweep, {"axis", "values", "seeds"}, "sweep");
    SweepSettings sw;
    sw.axis = parse_axis(get_or(sweep, "axis", std::string("epsilon"), "sweep"));
    sw.values = get_or(sweep, "values", std::vector<double>{}, "sweep");
    sw.seeds = get_or(sweep, "seeds", std::vector<std::uint64_t>{}, "sweep");
    if (sw.values.empty()) throw ConfigError("sweep.values must not be empty");
    if (sw.seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
    for (double v : sw.values) apply_axis(cfg.gatekeeper, sw.axis, v).validate();
    cfg.sweep = std::move(sw);
  }

  if (const YAML::Node out = root["output"]; out && !out.IsNull()) {
    yaml::require_known_keys(out, {"trajectories", "diagnostics"}, "output");
    cfg.output.trajectories = get_or(out, "trajectories", cfg.output.trajectories, "output");
    cfg.output.diagnostics = get_or(out, "diagnostics", cfg.output.diagnostics, "output");
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  YAML::Node root;
  try {
    root = YAML::Load(in);
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  // A run manifest carries the resolved config under `config`.
  if (root.IsMap() && root["artifact_version"] && root["config"]) return from_yaml(root["config"]);
  return from_yaml(root);
}

YAML::Node RunConfig::to_yaml() const {
  YAML::Node root;
  YAML::Node scen = YAML::Clone(scenario);
  scen["name"] = scenario_name;
  root["scenario"] = scen;
  root["gatekeeper"] = gatekeeper_to_yaml(gatekeeper);
  YAML::Node trial_node;
  trial_node["max_steps"] = trial.max_steps;
  trial_node["seed"] = trial.seed;
  root["trial"] = trial_node;
  if (sweep) {
    YAML::Node s;
    s["axis"] = axis_name(sweep->axis);
    YAML::Node values(YAML::NodeType::Sequence);
    for (double v : sweep->values) values.push_back(v);
    values.SetStyle(YAML::EmitterStyle::Flow);
    s["values"] = values;
    YAML::Node seeds(YAML::NodeType::Sequence);
    for (auto v : sweep->seeds) seeds.push_back(v);
    seeds.SetStyle(YAML::EmitterStyle::Flow);
    s["seeds"] = seeds;
    root["sweep"] = s;
  }
  YAML::Node out;
  out["trajectories"] = output.trajectories;
  out["diagnostics"] = output.diagnostics;
  root["output"] = out;
  return root;
}

}  // namespace drsgk::harness
