// Command-line front end: run, sweep, certify, calibrate.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "drsgk/filter.hpp"
#include "drsgk/harness/config.hpp"
#include "drsgk/harness/output.hpp"
#include "drsgk/harness/sweep.hpp"
#include "drsgk/harness/trial.hpp"
#include "drsgk/parallel.hpp"

namespace {

namespace fs = std::filesystem;
using namespace drsgk;
using namespace drsgk::harness;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int threads = 0;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_out) {
  cmd->add_option("--config", c.config, "run configuration (YAML) or run manifest")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "override the seed (sweep: single seed)");
  if (with_out) cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--threads", c.threads, "worker threads (default: all)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--verbose", c.verbose, "progress on stderr");
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void print_trials(const SweepResult& sweep) {
  for (std::size_t v = 0; v < sweep.trials.size(); ++v) {
    for (const auto& t : sweep.trials[v]) {
      std::cerr << axis_name(sweep.spec.axis) << "=" << format_real(sweep.spec.values[v])
                << " seed=" << t.seed << " safe=" << t.safe << " goal_time="
                << format_real(t.goal_time) << " backup_ratio=" << format_real(t.backup_ratio)
                << " steps=" << t.steps << " wall=" << t.wall_time << "s\n";
    }
  }
}

int run_sweep_command(const Common& c, const std::string& command, bool single) {
  RunConfig config = RunConfig::load(c.config);
  SweepSpec spec = sweep_spec(config);
  if (single) {
    if (c.seed) config.trial.seed = *c.seed;
    spec.values = {config.gatekeeper.epsilon};
    spec.axis = SweepAxis::kEpsilon;
    spec.seeds = {config.trial.seed};
    config.sweep.reset();
    config.output.trajectories = true;
  } else if (c.seed) {
    spec.seeds = {*c.seed};
    if (config.sweep) config.sweep->seeds = spec.seeds;
  }

  TrialOptions options;
  options.max_steps = config.trial.max_steps;
  options.record_trajectory = config.output.trajectories;
  options.record_diagnostics = config.output.diagnostics;

  const auto started = std::chrono::steady_clock::now();
  const SweepResult result = run_sweep(config, spec, options);
  RunInfo info;
  info.command = command;
  info.threads = thread_count();
  info.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (c.verbose) print_trials(result);

  const auto files = emit_outputs(c.out, config, result, info);
  std::cout << metrics_csv(spec.axis, result.rows);
  if (c.verbose) {
    for (const auto& f : files) std::cerr << "wrote " << f.string() << "\n";
  }
  return kExitOk;
}

StateVector parse_state(const std::string& text, std::size_t dim) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(parse_real(item));
  if (values.size() != dim) {
    throw ConfigError("--state: expected " + std::to_string(dim) + " comma-separated values");
  }
  return StateVector(std::span<const double>(values));
}

template <class T>
YAML::Node flow(const std::vector<T>& values) {
  YAML::Node seq(YAML::NodeType::Sequence);
  for (const auto& v : values) seq.push_back(v);
  seq.SetStyle(YAML::EmitterStyle::Flow);
  return seq;
}

int certify_command(const Common& c, const std::string& state_text, long time,
                    std::optional<long> previous, const std::string& dump) {
  const RunConfig config = RunConfig::load(c.config);
  const std::uint64_t seed = c.seed.value_or(config.trial.seed);
  const auto scenario = ScenarioRegistry::global().create(config.scenario_name,
                                                          config.scenario, seed);
  const StateVector x = state_text.empty()
                            ? scenario->initial_state()
                            : parse_state(state_text, scenario->model().state_dim());
  std::vector<RolloutBatch> batches;
  const CertificationOutcome o = certify(time, x, previous.value_or(time), scenario->problem(),
                                         config.gatekeeper, seed, dump.empty() ? nullptr : &batches);
  YAML::Node node;
  node["time"] = o.time;
  node["counts"] = flow(o.counts);
  node["lipschitz"] = flow(o.lipschitz);
  node["bounds"] = flow(o.bounds);
  node["feasible"] = flow(o.feasible);
  node["selected_switch"] = o.selected_switch;
  node["fell_back"] = o.fell_back;
  node["rho"] = o.rho;
  node["threshold"] = o.threshold;
  node["lipschitz_estimated"] = o.lipschitz_estimated;
  node["lipschitz_subsampled"] = o.lipschitz_subsampled;
  node["unattainable"] = o.unattainable;
  node["diverged_rollouts"] = o.diverged_rollouts;
  node["diverged_gradients"] = o.diverged_gradients;
  YAML::Emitter emitter;
  emitter << node;
  std::cout << emitter.c_str() << "\n";
  if (!dump.empty()) write_text(dump, rollout_csv(batches));
  return kExitOk;
}

int calibrate_command(const Common& c, std::vector<std::uint64_t> seeds, std::size_t stride,
                      std::size_t gradient_samples) {
  const RunConfig config = RunConfig::load(c.config);
  if (seeds.empty()) seeds = {c.seed.value_or(config.trial.seed)};
  const CalibrationResult r = calibrate_lipschitz(config, seeds, stride, gradient_samples);
  if (c.verbose) {
    for (double e : r.estimates) std::cerr << format_real(e) << "\n";
  }
  std::cout << "states: " << r.states << "\nmax_lipschitz: " << format_real(r.maximum) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributionally robust sampling-based safety filter"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, certify_opts, calibrate_opts;
  auto* run = app.add_subcommand("run", "simulate one trial");
  add_common(run, run_opts, true);
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep over seeds");
  add_common(sweep, sweep_opts, true);

  auto* cert = app.add_subcommand("certify", "one certification from a state snapshot");
  add_common(cert, certify_opts, false);
  std::string state_text;
  long time = 0;
  std::optional<long> previous;
  std::string dump;
  cert->add_option("--state", state_text, "comma-separated state (default: scenario start)");
  cert->add_option("--time", time, "simulation step index")->check(CLI::NonNegativeNumber);
  cert->add_option("--previous-switch", previous, "committed switch before this call");
  cert->add_option("--dump", dump, "write per-sample margins and gradient norms (CSV)");

  auto* cal = app.add_subcommand("calibrate", "estimate L_H along filtered trajectories");
  add_common(cal, calibrate_opts, false);
  std::vector<std::uint64_t> cal_seeds;
  std::size_t stride = 20;
  std::size_t gradient_samples = 50;
  cal->add_option("--seeds", cal_seeds, "trial seeds");
  cal->add_option("--stride", stride, "re-certify every k-th visited state");
  cal->add_option("--gradient-samples", gradient_samples, "gradients per candidate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  const std::string command = command_line(argc, argv);
  auto threads = [](const Common& c) { set_thread_count(c.threads); };
  try {
    if (*run) {
      threads(run_opts);
      return run_sweep_command(run_opts, command, true);
    }
    if (*sweep) {
      threads(sweep_opts);
      return run_sweep_command(sweep_opts, command, false);
    }
    if (*cert) {
      threads(certify_opts);
      return certify_command(certify_opts, state_text, time, previous, dump);
    }
    if (*cal) {
      threads(calibrate_opts);
      return calibrate_command(calibrate_opts, cal_seeds, stride, gradient_samples);
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
