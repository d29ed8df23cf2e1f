#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "drsgk/harness/config.hpp"
#include "drsgk/harness/sweep.hpp"
#include "drsgk/harness/trial.hpp"
#include "drsgk/rollout.hpp"

namespace drsgk::harness {

inline constexpr const char* kArtifactVersion = "0.1.0";

inline constexpr const char* kMetricsHeader =
    "axis,value,trials,safe,goals,safe_feasible_percent,mean_goal_time,mean_backup_ratio";
inline constexpr const char* kTrialsHeader =
    "axis,value,seed,safe,goal_reached,goal_time,backup_ratio,steps,backup_steps,"
    "certifications,fallbacks,min_margin";
inline constexpr const char* kDiagnosticsHeader =
    "value,seed,time,counts,lipschitz,bounds,feasible,selected_switch,fell_back,unattainable,"
    "lipschitz_estimated,lipschitz_subsampled,rho,threshold,diverged_rollouts,diverged_gradients";
inline constexpr const char* kRolloutHeader = "candidate,sample,margin,gradient_norm";

/// Shortest decimal that round-trips; "inf", "-inf" and "nan" otherwise.
std::string format_real(double value);
/// Inverse of format_real.
double parse_real(const std::string& text);

/// Writes `content` to `path`, throwing IoError with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& content);

std::string metrics_csv(SweepAxis axis, const std::vector<MetricsRow>& rows);
std::string trials_csv(const SweepResult& sweep);
std::string trajectory_csv(const std::vector<std::string>& state_names,
                           const std::vector<std::string>& control_names, double dt,
                           const std::vector<TrajectoryRow>& rows);
std::string diagnostics_csv(const SweepResult& sweep);
std::string diagnostics_csv(double value, std::uint64_t seed,
                            const std::vector<CertificationOutcome>& outcomes,
                            bool with_header);
std::string rollout_csv(const std::vector<RolloutBatch>& batches);

/// One parsed row of a per-trial file.
struct TrialRecord {
  double value = 0.0;
  TrialResult result;
};

/// Reads a file written by trials_csv.
std::vector<TrialRecord> read_trials_csv(const std::filesystem::path& path);

/// Re-aggregates per-trial records into metrics rows, grouped by value in
/// order of first appearance.
std::vector<MetricsRow> reaggregate(const std::vector<TrialRecord>& records);

/// Lowercase hex SHA-256 of a byte string / file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

struct RunInfo {
  std::string command;
  int threads = 1;
  double wall_time = 0.0;
};

/*!
 * Writes metrics.csv, trials.csv, optional diagnostics.csv and trajectory
 * files, and manifest.yaml (resolved config, config hash, seeds, checksums)
 * into `dir`. Returns the written paths, manifest last.
 */
std::vector<std::filesystem::path> emit_outputs(const std::filesystem::path& dir,
                                                const RunConfig& config,
                                                const SweepResult& sweep,
                                                const RunInfo& info);

/// Config hash recorded in manifests: SHA-256 of the emitted resolved config.
std::string config_hash(const RunConfig& config);

}  // namespace drsgk::harness
