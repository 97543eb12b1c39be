#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "t4reg/apid.hpp"
#include "t4reg/rapid.hpp"

namespace t4reg {

enum class Kind { open_loop, apid, fixed_pid, apid_no_bandlock, rapid, setpoint_sweep, time_resolution };

std::string to_string(Kind k);
Kind kind_from_string(const std::string& s);
bool is_controller_kind(Kind k);

struct ExperimentConfig {
  Kind kind = Kind::apid;
  // Controller used by each run of a sweep or time-resolution study.
  Kind controller = Kind::apid;
  double setpoint = 25.0;
  std::vector<double> setpoints{15.0, 20.0, 25.0, 30.0, 35.0, 45.0};
  std::vector<double> amplitudes{0.0, 0.005, 0.01, 0.015, 0.02};
  double horizon = 400.0 * 60.0;           // min, closed loop
  double open_loop_horizon = 80.0 * 60.0;  // min
  double open_loop_trace_every = 10.0;     // min
  std::uint64_t seed = 1;
  bool metrics_on_true = false;  // default: controller-side samples
  double dt_s = 1.0;  // integration step, seconds
  double dt_coarse_s = 0.1;
  double dt_fine_s = 0.1 / 12.0;
  std::string output_dir = "runs/default";

  ControllerConfig ctrl;  // T4_des, dt and the adapt/lock flags are set by resolve()
  RobustConfig robust;
  UncertaintyConfig uncertainty;

  // Copies setpoint, dt and the kind-dependent flags into ctrl.
  void resolve();
  void validate() const;
  int windows() const;
};

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are a ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// key.path=value, value parsed as JSON when possible, otherwise as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace t4reg
