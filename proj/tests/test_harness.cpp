#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "t4reg/errors.hpp"
#include "t4reg/harness.hpp"
#include "t4reg/kernels.hpp"

using namespace t4reg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("t4reg_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig short_run(Kind k, double hours = 4.0) {
  ExperimentConfig c;
  c.kind = k;
  c.horizon = hours * 60.0;
  return c;
}

}  // namespace

TEST_CASE("config json round trip") {
  ExperimentConfig c;
  c.setpoint = 30.0;
  c.seed = 99;
  c.ctrl.pid.K_b_aw = 0.07;
  c.robust.M = 5;
  c.uncertainty.rel[4] = 0.2;
  c.resolve();
  const ExperimentConfig back = config_from_json(json(to_json(c)));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.ctrl.pid.e_small == doctest::Approx(0.05 * 30.0));
}

TEST_CASE("unknown config keys are rejected") {
  json j = {{"pid", {{"alpha_dd", 0.3}}}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  json top = {{"nonsense", 1}};
  CHECK_THROWS_AS(config_from_json(top), ConfigError);
  json bad = {{"pid", {{"alpha_d", 0.0}}}};
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
}

TEST_CASE("overrides") {
  json j = json::object();
  apply_override(j, "pid.K_b_aw=0.2");
  apply_override(j, "experiment.kind=rapid");
  apply_override(j, "experiment.setpoints=[20,30]");
  const ExperimentConfig c = config_from_json(j);
  CHECK(c.ctrl.pid.K_b_aw == 0.2);
  CHECK(c.kind == Kind::rapid);
  CHECK(c.setpoints == std::vector<double>{20.0, 30.0});
  CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
}

TEST_CASE("open loop at zero amplitude stays at the basal steady state") {
  ExperimentConfig c;
  c.kind = Kind::open_loop;
  c.amplitudes = {0.0};
  c.open_loop_horizon = 240.0;
  const OpenLoopResult r = run_open_loop(c);
  REQUIRE(r.t4_ext.size() == 1);
  const double z0 = steady_state(0.0, c.ctrl.model).t4_ext();
  for (double v : r.t4_ext[0]) CHECK(std::abs(v - z0) <= 1e-6);
  CHECK(r.t4_ext[0].size() == r.t_min.size());

  c.open_loop_horizon = 0.0;
  CHECK_THROWS_AS(run_open_loop(c), ConfigError);
}

TEST_CASE("trace csv round trip") {
  const RunResult r = run_closed_loop(short_run(Kind::apid));
  REQUIRE(!r.trace.empty());
  const std::string text = trace_csv(r.trace);
  CHECK(text.substr(0, text.find('\n')) == kTraceColumns);
  const auto back = parse_trace_csv(text);
  REQUIRE(back.size() == r.trace.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    const auto& a = back[k];
    const auto& b = r.trace[k];
    CHECK(a.t_min == b.t_min);
    CHECK(a.z_true == b.z_true);
    CHECK(a.ef == b.ef);
    CHECK(a.amp == b.amp);
    CHECK(a.ki == b.ki);
    CHECK((a.J == b.J || (std::isnan(a.J) && std::isnan(b.J))));
    CHECK(a.locked == b.locked);
  }
  CHECK_THROWS_AS(parse_trace_csv("bad,header\n"), IoError);
}

TEST_CASE("exports need an existing directory and write a valid summary") {
  const RunResult r = run_closed_loop(short_run(Kind::fixed_pid));
  CHECK_THROWS_AS(export_run(r, fs::temp_directory_path() / "t4reg_test_missing_dir" / "x"), DirectoryError);

  const fs::path dir = scratch_dir("export");
  export_run(r, dir);
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "config.json"));
  const json s = json::parse(slurp(dir / "summary.json"));
  CHECK_NOTHROW(validate_summary(s));
  CHECK(s["kind"] == "fixed_pid");

  json broken = s;
  broken["metrics"].erase("iae");
  CHECK_THROWS_AS(validate_summary(broken), ConfigError);

  // the echoed config reproduces the run
  const ExperimentConfig again = load_config((dir / "config.json").string());
  CHECK(trace_csv(run_closed_loop(again).trace) == trace_csv(r.trace));
}

TEST_CASE("runs are deterministic and independent of the kernel mode") {
  ExperimentConfig c = short_run(Kind::rapid, 2.0);
  c.seed = 17;
  kernels::set_default_exec(kernels::Exec::serial);
  const std::string a = trace_csv(run_closed_loop(c).trace);
  kernels::set_default_exec(kernels::Exec::parallel);
  const std::string b = trace_csv(run_closed_loop(c).trace);
  const std::string b2 = trace_csv(run_closed_loop(c).trace);
  CHECK(a == b);
  CHECK(b == b2);
  c.seed = 18;
  CHECK(trace_csv(run_closed_loop(c).trace) != a);
}

TEST_CASE("setpoint sweep") {
  ExperimentConfig c;
  c.kind = Kind::setpoint_sweep;
  c.setpoints = {20.0, 30.0};
  c.horizon = 60.0;
  const SweepResult s = run_setpoint_sweep(c);
  REQUIRE(s.runs.size() == 2);
  CHECK(s.runs[0].cfg.setpoint == 20.0);
  CHECK(s.runs[1].cfg.setpoint == 30.0);
  for (const auto& r : s.runs) CHECK(std::isfinite(r.metrics.final_error));
  const fs::path dir = scratch_dir("sweep");
  export_sweep(s, dir);
  const std::string csv = slurp(dir / "sweep_summary.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  c.setpoints.clear();
  CHECK_THROWS_AS(run_setpoint_sweep(c), EmptyList);
}

TEST_CASE("time resolution with equal steps gives zero difference") {
  ExperimentConfig c;
  c.kind = Kind::time_resolution;
  c.horizon = 60.0;
  c.dt_coarse_s = 1.0;
  c.dt_fine_s = 1.0;
  const TimeResResult r = run_time_resolution(c);
  CHECK(r.max_diff == 0.0);
  CHECK(r.rms_diff == 0.0);
  const fs::path dir = scratch_dir("timeres");
  export_time_resolution(r, dir);
  const json s = json::parse(slurp(dir / "summary.json"));
  CHECK(s["dt_coarse_s"] == 1.0);
  CHECK(s["dt_fine_s"] == 1.0);
  CHECK(s.contains("burst_snapping"));
}

TEST_CASE("output root from the environment") {
  ::unsetenv(kOutputRootEnv);
  CHECK(resolve_output_dir("runs/a") == fs::path("runs/a"));
  ::setenv(kOutputRootEnv, "/tmp/t4root", 1);
  CHECK(resolve_output_dir("runs/a") == fs::path("/tmp/t4root/runs/a"));
  CHECK(resolve_output_dir("/abs/x") == fs::path("/abs/x"));
  ::unsetenv(kOutputRootEnv);
}
