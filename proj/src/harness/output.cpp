#include "drsgk/harness/output.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "drsgk/scenarios/scenario.hpp"

namespace drsgk::harness {
namespace {

namespace fs = std::filesystem;

template <class T, class F>
std::string joined(const std::vector<T>& values, F&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format(values[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

const char* flag(bool b) { return b ? "1" : "0"; }

std::string file_stem(std::size_t value_index, std::uint64_t seed) {
  std::ostringstream name;
  name << "trajectory_v" << value_index << "_seed" << seed << ".csv";
  return name.str();
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("not a number: '" + text + "'");
  }
  return value;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string metrics_csv(SweepAxis axis, const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  const std::string name = axis_name(axis);
  for (const auto& r : rows) {
    out += name + "," + format_real(r.value) + "," + std::to_string(r.trials) + "," +
           std::to_string(r.safe) + "," + std::to_string(r.goals) + "," +
           format_real(r.safe_percent) + "," + format_real(r.mean_goal_time) + "," +
           format_real(r.mean_backup_ratio) + "\n";
  }
  return out;
}

std::string trials_csv(const SweepResult& sweep) {
  std::string out = std::string(kTrialsHeader) + "\n";
  const std::string name = axis_name(sweep.spec.axis);
  for (std::size_t v = 0; v < sweep.trials.size(); ++v) {
    for (const auto& t : sweep.trials[v]) {
      out += name + "," + format_real(sweep.spec.values[v]) + "," + std::to_string(t.seed) + "," +
             flag(t.safe) + "," + flag(t.goal_reached) + "," + format_real(t.goal_time) + "," +
             format_real(t.backup_ratio) + "," + std::to_string(t.steps) + "," +
             std::to_string(t.backup_steps) + "," + std::to_string(t.certifications) + "," +
             std::to_string(t.fallbacks) + "," + format_real(t.min_margin) + "\n";
    }
  }
  return out;
}

std::string trajectory_csv(const std::vector<std::string>& state_names,
                           const std::vector<std::string>& control_names, double dt,
                           const std::vector<TrajectoryRow>& rows) {
  std::string out = "step,time";
  for (const auto& n : state_names) out += "," + n;
  for (const auto& n : control_names) out += "," + n;
  out += ",backup_active,committed_switch\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "," + format_real(static_cast<double>(r.step) * dt);
    for (double s : r.state) out += "," + format_real(s);
    for (std::size_t j = 0; j < control_names.size(); ++j) {
      out += ",";
      if (r.control) out += format_real((*r.control)[j]);
    }
    out += ",";
    if (r.control) out += flag(r.backup_active);
    out += "," + std::to_string(r.committed_switch) + "\n";
  }
  return out;
}

std::string diagnostics_csv(double value, std::uint64_t seed,
                            const std::vector<CertificationOutcome>& outcomes,
                            bool with_header) {
  std::string out = with_header ? std::string(kDiagnosticsHeader) + "\n" : std::string();
  auto count = [](std::size_t c) { return std::to_string(c); };
  for (const auto& o : outcomes) {
    out += format_real(value) + "," + std::to_string(seed) + "," + std::to_string(o.time) + "," +
           joined(o.counts, count) + "," + joined(o.lipschitz, format_real) + "," +
           joined(o.bounds, format_real) + "," + joined(o.feasible, count) + "," +
           std::to_string(o.selected_switch) + "," + flag(o.fell_back) + "," +
           flag(o.unattainable) + "," + flag(o.lipschitz_estimated) + "," +
           flag(o.lipschitz_subsampled) + "," + format_real(o.rho) + "," +
           format_real(o.threshold) + "," + std::to_string(o.diverged_rollouts) + "," +
           std::to_string(o.diverged_gradients) + "\n";
  }
  return out;
}

std::string diagnostics_csv(const SweepResult& sweep) {
  std::string out = std::string(kDiagnosticsHeader) + "\n";
  for (std::size_t v = 0; v < sweep.trials.size(); ++v) {
    for (const auto& t : sweep.trials[v]) {
      out += diagnostics_csv(sweep.spec.values[v], t.seed, t.diagnostics, false);
    }
  }
  return out;
}

std::string rollout_csv(const std::vector<RolloutBatch>& batches) {
  std::string out = std::string(kRolloutHeader) + "\n";
  for (const auto& b : batches) {
    for (std::size_t i = 0; i < b.margins.size(); ++i) {
      out += std::to_string(b.candidate) + "," + std::to_string(i) + "," +
             format_real(b.margins[i]) + ",";
      if (i < b.gradient_norms.size()) out += format_real(b.gradient_norms[i]);
      out += "\n";
    }
  }
  return out;
}

std::vector<TrialRecord> read_trials_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTrialsHeader) {
    throw ConfigError(path.string() + ": unexpected header");
  }
  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw ConfigError(path.string() + ": malformed row '" + line + "'");
    TrialRecord r;
    r.value = parse_real(f[1]);
    r.result.seed = std::stoull(f[2]);
    r.result.safe = f[3] == "1";
    r.result.goal_reached = f[4] == "1";
    r.result.goal_time = parse_real(f[5]);
    r.result.backup_ratio = parse_real(f[6]);
    r.result.steps = std::stoull(f[7]);
    r.result.backup_steps = std::stoull(f[8]);
    r.result.certifications = std::stoull(f[9]);
    r.result.fallbacks = std::stoull(f[10]);
    r.result.min_margin = parse_real(f[11]);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<MetricsRow> reaggregate(const std::vector<TrialRecord>& records) {
  std::vector<double> order;
  std::vector<std::vector<TrialResult>> groups;
  for (const auto& r : records) {
    std::size_t g = 0;
    while (g < order.size() && order[g] != r.value) ++g;
    if (g == order.size()) {
      order.push_back(r.value);
      groups.emplace_back();
    }
    groups[g].push_back(r.result);
  }
  std::vector<MetricsRow> rows;
  for (std::size_t g = 0; g < order.size(); ++g) rows.push_back(aggregate(order[g], groups[g]));
  return rows;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

std::string config_hash(const RunConfig& config) {
  YAML::Emitter emitter;
  emitter << config.to_yaml();
  return sha256_hex(emitter.c_str());
}

std::vector<fs::path> emit_outputs(const fs::path& dir, const RunConfig& config,
                                   const SweepResult& sweep, const RunInfo& info) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  auto emit = [&](const fs::path& path, const std::string& content) {
    write_text(path, content);
    written.push_back(path);
  };
  emit(dir / "metrics.csv", metrics_csv(sweep.spec.axis, sweep.rows));
  emit(dir / "trials.csv", trials_csv(sweep));
  if (config.output.diagnostics) emit(dir / "diagnostics.csv", diagnostics_csv(sweep));
  if (config.output.trajectories) {
    const auto scenario =
        ScenarioRegistry::global().create(config.scenario_name, config.scenario, 0);
    for (std::size_t v = 0; v < sweep.trials.size(); ++v) {
      for (const auto& t : sweep.trials[v]) {
        emit(dir / file_stem(v, t.seed),
             trajectory_csv(scenario->state_names(), scenario->control_names(),
                            scenario->model().dt(), t.trajectory));
      }
    }
  }

  YAML::Node manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["command"] = info.command;
  manifest["config_hash"] = config_hash(config);
  YAML::Node seeds(YAML::NodeType::Sequence);
  for (auto s : sweep.spec.seeds) seeds.push_back(s);
  seeds.SetStyle(YAML::EmitterStyle::Flow);
  manifest["seeds"] = seeds;
  manifest["threads"] = info.threads;
  manifest["wall_time_seconds"] = info.wall_time;
  YAML::Node files(YAML::NodeType::Sequence);
  for (const auto& p : written) {
    YAML::Node f;
    f["path"] = p.filename().string();
    f["sha256"] = sha256_file(p);
    f["bytes"] = static_cast<std::uint64_t>(fs::file_size(p));
    files.push_back(f);
  }
  manifest["files"] = files;
  manifest["config"] = config.to_yaml();
  YAML::Emitter emitter;
  emitter << manifest;
  emit(dir / "manifest.yaml", std::string(emitter.c_str()) + "\n");
  return written;
}

}  // namespace drsgk::harness
