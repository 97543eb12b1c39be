// Command-line front end for the experiment harness.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "t4reg/errors.hpp"
#include "t4reg/harness.hpp"
#include "t4reg/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace t4reg;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out;
  double setpoint = 0.0;
  long long seed = -1;
  double horizon_h = 0.0;
  double dt_s = 0.0;
  std::string controller;
  int threads = 0;
  bool serial = false;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_file, "JSON config file");
  cmd->add_option("--set", c.sets, "override a config key, e.g. --set pid.Ts=60")->take_all();
  cmd->add_option("-o,--out", c.out, "output directory (relative paths go under $T4REG_OUTPUT_ROOT)");
  cmd->add_option("--setpoint", c.setpoint, "T4ext setpoint");
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--horizon-h", c.horizon_h, "horizon in hours");
  cmd->add_option("--dt-s", c.dt_s, "integration step in seconds");
  cmd->add_option("--controller", c.controller, "apid | fixed_pid | apid_no_bandlock | rapid");
  cmd->add_option("-j,--threads", c.threads, "OpenMP threads (0 = runtime default)");
  cmd->add_flag("--serial", c.serial, "use the serial rollout kernels");
  cmd->add_flag("--print-config", c.print_config, "print the resolved config and exit");
}

ExperimentConfig resolve(const Common& c, const std::string& kind, bool open_loop) {
  json j = json::object();
  if (!c.config_file.empty()) {
    std::ifstream in(c.config_file);
    if (!in) throw IoError("cannot open config file '" + c.config_file + "'");
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + c.config_file + "': " + e.what());
    }
  }
  j["experiment"]["kind"] = kind;
  if (!c.out.empty()) j["experiment"]["output_dir"] = c.out;
  if (c.setpoint > 0.0) j["experiment"]["setpoint"] = c.setpoint;
  if (c.seed >= 0) j["experiment"]["seed"] = c.seed;
  if (c.horizon_h > 0.0) j["experiment"][open_loop ? "open_loop_horizon_min" : "horizon_min"] = c.horizon_h * 60.0;
  if (c.dt_s > 0.0) j["experiment"]["dt_s"] = c.dt_s;
  if (!c.controller.empty()) j["experiment"]["controller"] = c.controller;
  for (const auto& s : c.sets) apply_override(j, s);
  return config_from_json(j);
}

fs::path prepare_dir(const ExperimentConfig& cfg) {
  const fs::path dir = resolve_output_dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DirectoryError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void print_metrics(const std::string& label, const RunResult& r) {
  const RunMetrics& m = r.metrics;
  auto h = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("-"); };
  std::printf("%-18s T4des=%-6g peak=%-9.4f OS=%6.2f%%  rise=%sh  settle5=%sh  final=%+.4f  in5=%.1f%%  IAE=%.1f\n",
              label.c_str(), r.cfg.setpoint, m.peak, m.overshoot_pct, h(m.rise_time).c_str(),
              h(m.settling_time[0]).c_str(), m.final_error, m.time_in_band_pct[0], m.iae);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"t4reg: EF-driven T4 production simulator and controllers"};
  app.require_subcommand(1);
  Common c;
  std::string run_kind = "apid";

  auto* open_loop = app.add_subcommand("open-loop", "constant-amplitude open-loop sweep");
  auto* run = app.add_subcommand("run", "one closed-loop run");
  auto* sweep = app.add_subcommand("sweep", "closed-loop setpoint sweep");
  auto* timeres = app.add_subcommand("timeres", "same run at two integration steps");
  auto* compare = app.add_subcommand("compare", "APID and RAPID side by side");
  for (auto* cmd : {open_loop, run, sweep, timeres, compare}) add_common(cmd, c);
  run->add_option("-k,--kind", run_kind, "apid | fixed_pid | apid_no_bandlock | rapid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
#ifdef _OPENMP
    if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
    if (c.serial) kernels::set_default_exec(kernels::Exec::serial);

    std::string kind;
    if (open_loop->parsed()) kind = "open_loop";
    else if (run->parsed()) kind = c.controller.empty() ? run_kind : c.controller;  // either flag names the controller
    else if (sweep->parsed()) kind = "setpoint_sweep";
    else if (timeres->parsed()) kind = "time_resolution";
    else kind = "apid";  // compare runs both controllers

    const ExperimentConfig cfg = resolve(c, kind, open_loop->parsed());
    if (c.print_config) {
      std::cout << to_json(cfg).dump(2) << "\n";
      return 0;
    }
    if (run->parsed() && !is_controller_kind(cfg.kind)) throw ConfigError("run needs a controller kind");
    const fs::path dir = prepare_dir(cfg);

    if (open_loop->parsed()) {
      const OpenLoopResult r = run_open_loop(cfg);
      export_open_loop(r, dir);
      for (std::size_t i = 0; i < r.amplitudes.size(); ++i)
        std::printf("A=%-8g mean T4ext over second half = %.6f\n", r.amplitudes[i], r.late_mean[i]);
    } else if (run->parsed()) {
      const RunResult r = run_closed_loop(cfg);
      export_run(r, dir);
      print_metrics(to_string(cfg.kind), r);
    } else if (sweep->parsed()) {
      const SweepResult r = run_setpoint_sweep(cfg);
      export_sweep(r, dir);
      for (const auto& x : r.runs) print_metrics(to_string(x.cfg.kind), x);
    } else if (timeres->parsed()) {
      const TimeResResult r = run_time_resolution(cfg);
      export_time_resolution(r, dir);
      std::printf("dt %g s vs %g s: max diff %.6g, rms diff %.6g (%.4f%% of setpoint)\n", r.coarse.cfg.dt_s,
                  r.fine.cfg.dt_s, r.max_diff, r.rms_diff, 100.0 * r.rms_diff / cfg.setpoint);
    } else {
      const CompareResult r = run_compare(cfg);
      export_compare(r, dir);
      print_metrics("apid", r.apid);
      print_metrics("rapid", r.rapid);
    }
    std::printf("wrote %s\n", dir.string().c_str());
    return 0;
  } catch (const Error& e) {
    static const char* names[] = {"", "", "numerical", "config", "io", "metric"};
    const int code = static_cast<int>(e.category());
    std::fprintf(stderr, "error[%s]: %s\n", names[code], e.what());
    return code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
