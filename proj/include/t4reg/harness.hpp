#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "t4reg/config.hpp"
#include "t4reg/metrics.hpp"

namespace t4reg {

// One row per control window, sampled at the window start.
struct WindowRecord {
  double t_min = 0.0;
  double z_true = 0.0;
  double z_raw = 0.0;
  double z_used = 0.0;
  double e = 0.0;
  double ef = 0.0;  // command applied on this window
  double amp = 0.0;
  double kp = 0.0, ki = 0.0, kd = 0.0;
  double J = 0.0;  // NaN where no cost was evaluated
  bool locked = false;

  bool operator==(const WindowRecord&) const = default;
};

struct RunResult {
  ExperimentConfig cfg;  // resolved single-run configuration
  std::vector<WindowRecord> trace;
  RunMetrics metrics;
  int scenarios = 0;  // scenarios per window (rapid only)
};

struct OpenLoopResult {
  ExperimentConfig cfg;
  std::vector<double> amplitudes;
  std::vector<double> t_min;
  std::vector<std::vector<double>> t4_ext;  // [amplitude][sample]
  std::vector<double> late_mean;            // time average over the second half of the horizon
};

struct SweepResult {
  ExperimentConfig cfg;
  std::vector<RunResult> runs;  // one per setpoint, in input order
};

struct TimeResResult {
  ExperimentConfig cfg;
  RunResult coarse;
  RunResult fine;
  double max_diff = 0.0;
  double rms_diff = 0.0;
};

struct CompareResult {
  ExperimentConfig cfg;
  RunResult apid;
  RunResult rapid;
};

// Controller-side samples, or true output if cfg.metrics_on_true.
std::vector<double> metric_samples(const RunResult& r);
std::vector<double> sample_hours(const RunResult& r);

OpenLoopResult run_open_loop(const ExperimentConfig& cfg);
RunResult run_closed_loop(const ExperimentConfig& cfg);
SweepResult run_setpoint_sweep(const ExperimentConfig& cfg);
TimeResResult run_time_resolution(const ExperimentConfig& cfg);
CompareResult run_compare(const ExperimentConfig& cfg);

// ---- artifacts ----

inline constexpr const char* kTraceColumns = "t_min,z_true,z_raw,z_used,e,EF_cmd,A_cmd,kp,ki,kd,J,locked";
inline constexpr const char* kSummarySchema = "t4reg.summary/1";
inline constexpr const char* kOutputRootEnv = "T4REG_OUTPUT_ROOT";

std::string trace_csv(const std::vector<WindowRecord>& trace);
std::vector<WindowRecord> parse_trace_csv(const std::string& text);
std::vector<WindowRecord> read_trace_csv(const std::filesystem::path& file);

nlohmann::ordered_json metrics_json(const RunMetrics& m);
nlohmann::ordered_json summary_json(const RunResult& r);
// Throws ConfigError describing the first mismatch.
void validate_summary(const nlohmann::json& j);

// Each export writes into an existing directory and throws DirectoryError otherwise.
void export_run(const RunResult& r, const std::filesystem::path& dir);
void export_open_loop(const OpenLoopResult& r, const std::filesystem::path& dir);
void export_sweep(const SweepResult& r, const std::filesystem::path& dir);
void export_time_resolution(const TimeResResult& r, const std::filesystem::path& dir);
void export_compare(const CompareResult& r, const std::filesystem::path& dir);

// output_dir, placed under $T4REG_OUTPUT_ROOT when that is set and the path is relative.
std::filesystem::path resolve_output_dir(const std::string& output_dir);

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace t4reg
