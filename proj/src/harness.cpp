#include "t4reg/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "t4reg/errors.hpp"
#include "t4reg/rapid.hpp"

namespace t4reg {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shortest representation that parses back to the same double.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double parse_num(std::string_view s) {
  if (s == "nan") return kNaN;
  double x = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) throw IoError("bad number in CSV: '" + std::string(s) + "'");
  return x;
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

ordered_json band_map(const std::array<double, 3>& v) {
  return {{"5%", v[0]}, {"10%", v[1]}, {"30%", v[2]}};
}
ordered_json band_map(const std::array<std::optional<double>, 3>& v) {
  return {{"5%", opt_json(v[0])}, {"10%", opt_json(v[1])}, {"30%", opt_json(v[2])}};
}

void require_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DirectoryError("output directory does not exist: " + dir.string());
}

fs::path make_subdir(const fs::path& dir, const std::string& name) {
  const fs::path sub = dir / name;
  std::error_code ec;
  fs::create_directories(sub, ec);
  if (ec) throw DirectoryError("cannot create " + sub.string() + ": " + ec.message());
  return sub;
}

std::string config_echo(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

RunMetrics metrics_for(const RunResult& r) {
  const auto z = metric_samples(r);
  const auto t = sample_hours(r);
  return compute_metrics(t, z, r.cfg.setpoint, r.cfg.ctrl.pid.Ts / 60.0);
}

RunResult run_apid_family(const ExperimentConfig& cfg) {
  const ControllerConfig& cc = cfg.ctrl;
  const int W = cfg.windows();
  PlantState y = steady_state(0.0, cc.model);
  ControllerState st = initial_controller_state(cc);

  RunResult r;
  r.cfg = cfg;
  r.trace.reserve(W);
  for (int m = 0; m < W; ++m) {
    const double t = m * cc.pid.Ts;
    const double z = y.t4_ext();
    const StepOutcome out = apid_step(z, y, t, st, cc);
    r.trace.push_back({t, z, z, z, out.e, out.ef, out.amp, out.gains.kp, out.gains.ki, out.gains.kd, out.cost,
                       out.locked});
    y = advance_window(y, build_schedule(out.amp, t, cc.pid.Ts, cc.burst), Disturbance{}, cc.model, cc.dt);
  }
  return r;
}

RunResult run_rapid(const ExperimentConfig& cfg) {
  const ControllerConfig& cc = cfg.ctrl;
  const int W = cfg.windows();
  Rng rng(cfg.seed);
  const Perturbation truth = sample_perturbation(rng, cfg.uncertainty);
  const PlantParams true_params = truth.apply(cc.model);
  const Disturbance d4 = truth.disturbance();

  PlantState y = steady_state(0.0, true_params);
  RapidState st = initial_rapid_state(cc, cfg.robust, cfg.uncertainty, steady_state(0.0, cc.model));

  RunResult r;
  r.cfg = cfg;
  r.scenarios = cfg.robust.M;
  r.trace.reserve(W);
  for (int m = 0; m < W; ++m) {
    const double t = m * cc.pid.Ts;
    const double z = y.t4_ext();
    const double raw = measure(z, st.pipe, rng);
    const double nu = rng.uniform(-truth.sigma_A, truth.sigma_A);
    const RapidOutcome out = rapid_step(raw, t, st, cc, cfg.robust, cfg.uncertainty, rng);
    const StepOutcome& s = out.step;
    r.trace.push_back({t, z, raw, out.z_used, s.e, s.ef, s.amp, s.gains.kp, s.gains.ki, s.gains.kd, s.cost, s.locked});
    const EfSchedule sched =
        perturb_schedule(build_schedule(s.amp, t, cc.pid.Ts, cc.burst), truth.g_A, truth.tau_A, nu);
    y = advance_window(y, sched, d4, true_params, cc.dt);
  }
  return r;
}

ExperimentConfig single_run(const ExperimentConfig& base, Kind kind, double setpoint) {
  ExperimentConfig c = base;
  c.kind = kind;
  c.controller = kind;
  c.setpoint = setpoint;
  c.resolve();
  return c;
}

std::string setpoint_label(double s) { return "T4des_" + num(s); }

}  // namespace

std::vector<double> metric_samples(const RunResult& r) {
  std::vector<double> z;
  z.reserve(r.trace.size());
  for (const auto& w : r.trace) z.push_back(r.cfg.metrics_on_true ? w.z_true : w.z_used);
  return z;
}

std::vector<double> sample_hours(const RunResult& r) {
  std::vector<double> t;
  t.reserve(r.trace.size());
  for (const auto& w : r.trace) t.push_back(w.t_min / 60.0);
  return t;
}

OpenLoopResult run_open_loop(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  cfg.resolve();
  cfg.validate();
  const ControllerConfig& cc = cfg.ctrl;
  const double Ts = cc.pid.Ts;
  const int n = steps_per_window(Ts, cc.dt);
  const int every = steps_per_window(cfg.open_loop_trace_every, cc.dt);
  const int W = static_cast<int>(std::llround(cfg.open_loop_horizon / Ts));
  const long long total = static_cast<long long>(W) * n;
  const long long half = total / 2;
  const double h = Ts / n;

  OpenLoopResult r;
  r.cfg = cfg;
  r.amplitudes = cfg.amplitudes;
  for (long long g = 0; g <= total; g += every) r.t_min.push_back(g * h);
  const auto nA = static_cast<int>(cfg.amplitudes.size());
  r.t4_ext.assign(nA, {});
  r.late_mean.assign(nA, 0.0);

  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < nA; ++i) {
    try {
      const double A = cfg.amplitudes[i];
      PlantState y = steady_state(0.0, cc.model);
      std::vector<double> trace;
      trace.reserve(r.t_min.size());
      double acc = 0.0, prev = y.t4_ext();
      for (int w = 0; w < W; ++w) {
        const EfSchedule sched = build_schedule(A, w * Ts, Ts, cc.burst);
        y = propagate(y, sched, Disturbance{}, cc.model, n, [&](int k, double, const PlantState& s, double) {
          const long long g = static_cast<long long>(w) * n + k;
          if (k == 0 && w > 0) return;
          const double v = s.t4_ext();
          if (g % every == 0) trace.push_back(v);
          if (g > half) acc += 0.5 * h * (prev + v);
          prev = v;
        });
      }
      r.t4_ext[i] = std::move(trace);
      r.late_mean[i] = acc / ((total - half) * h);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return r;
}

RunResult run_closed_loop(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  if (!is_controller_kind(cfg.kind)) throw ConfigError("run_closed_loop needs a controller kind, got " + to_string(cfg.kind));
  cfg.controller = cfg.kind;
  cfg.resolve();
  cfg.validate();
  RunResult r = cfg.kind == Kind::rapid ? run_rapid(cfg) : run_apid_family(cfg);
  r.metrics = metrics_for(r);
  return r;
}

SweepResult run_setpoint_sweep(const ExperimentConfig& cfg) {
  if (cfg.setpoints.empty()) throw EmptyList("setpoint sweep needs at least one setpoint");
  SweepResult s;
  s.cfg = cfg;
  s.cfg.kind = Kind::setpoint_sweep;
  const auto n = static_cast<int>(cfg.setpoints.size());
  s.runs.resize(n);
  std::exception_ptr err;
  // Runs are independent; nested rollout kernels fall back to one thread.
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      s.runs[i] = run_closed_loop(single_run(cfg, cfg.controller, cfg.setpoints[i]));
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return s;
}

TimeResResult run_time_resolution(const ExperimentConfig& cfg) {
  TimeResResult r;
  r.cfg = cfg;
  r.cfg.kind = Kind::time_resolution;
  ExperimentConfig c = single_run(cfg, cfg.controller, cfg.setpoint);
  ExperimentConfig f = c;
  c.dt_s = cfg.dt_coarse_s;
  f.dt_s = cfg.dt_fine_s;
  r.coarse = run_closed_loop(c);
  r.fine = run_closed_loop(f);
  const auto a = metric_samples(r.coarse);
  const auto b = metric_samples(r.fine);
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = std::abs(a[k] - b[k]);
    r.max_diff = std::max(r.max_diff, d);
    sq += d * d;
  }
  r.rms_diff = a.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(a.size()));
  return r;
}

CompareResult run_compare(const ExperimentConfig& cfg) {
  CompareResult r;
  r.cfg = cfg;
  r.apid = run_closed_loop(single_run(cfg, Kind::apid, cfg.setpoint));
  r.rapid = run_closed_loop(single_run(cfg, Kind::rapid, cfg.setpoint));
  return r;
}

// ---- artifacts ----

std::string trace_csv(const std::vector<WindowRecord>& trace) {
  std::string out = kTraceColumns;
  out += '\n';
  for (const auto& w : trace) {
    for (double v : {w.t_min, w.z_true, w.z_raw, w.z_used, w.e, w.ef, w.amp, w.kp, w.ki, w.kd, w.J}) {
      out += num(v);
      out += ',';
    }
    out += w.locked ? "1\n" : "0\n";
  }
  return out;
}

std::vector<WindowRecord> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTraceColumns) throw IoError("trace CSV header mismatch");
  std::vector<WindowRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (f.size() != 12) throw IoError("trace CSV row has " + std::to_string(f.size()) + " fields");
    WindowRecord w;
    double* dst[] = {&w.t_min, &w.z_true, &w.z_raw, &w.z_used, &w.e, &w.ef, &w.amp, &w.kp, &w.ki, &w.kd, &w.J};
    for (int i = 0; i < 11; ++i) *dst[i] = parse_num(f[i]);
    if (f[11] != "0" && f[11] != "1") throw IoError("bad locked flag in trace CSV");
    w.locked = f[11] == "1";
    out.push_back(w);
  }
  return out;
}

std::vector<WindowRecord> read_trace_csv(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace_csv(ss.str());
}

ordered_json metrics_json(const RunMetrics& m) {
  return {{"rise_time_h", opt_json(m.rise_time)},
          {"peak", m.peak},
          {"overshoot_pct", m.overshoot_pct},
          {"final_error", m.final_error},
          {"iae", m.iae},
          {"settling_time_h", band_map(m.settling_time)},
          {"time_in_band_pct", band_map(m.time_in_band_pct)},
          {"band_entry_time_h", band_map(m.band_entry_time)}};
}

ordered_json summary_json(const RunResult& r) {
  int locked = 0, at_max = 0;
  for (const auto& w : r.trace) {
    locked += w.locked;
    at_max += w.ef >= r.cfg.ctrl.act.EF_max;
  }
  return {{"schema", kSummarySchema},
          {"kind", to_string(r.cfg.kind)},
          {"setpoint", r.cfg.setpoint},
          {"seed", r.cfg.seed},
          {"rng", Rng::kAlgorithm},
          {"windows", r.trace.size()},
          {"Ts_min", r.cfg.ctrl.pid.Ts},
          {"dt_s", r.cfg.dt_s},
          {"metrics_channel", r.cfg.metrics_on_true ? "true" : "measured"},
          {"iae_rule", "rectangle: sum of |e_k| * Ts over windows, Ts in hours"},
          {"scenarios_per_window", r.scenarios},
          {"locked_windows", locked},
          {"ef_max_windows", at_max},
          {"metrics", metrics_json(r.metrics)}};
}

void validate_summary(const json& j) {
  auto need = [&](const json& obj, const char* key, auto pred, const char* what) {
    if (!obj.is_object() || !obj.contains(key) || !pred(obj[key]))
      throw ConfigError(std::string("summary: '") + key + "' must be " + what);
  };
  const auto is_num = [](const json& v) { return v.is_number(); };
  const auto is_num_or_null = [](const json& v) { return v.is_number() || v.is_null(); };
  const auto is_str = [](const json& v) { return v.is_string(); };
  const auto is_int = [](const json& v) { return v.is_number_integer(); };
  need(j, "schema", [](const json& v) { return v == kSummarySchema; }, "the schema id");
  need(j, "kind", is_str, "a string");
  need(j, "setpoint", is_num, "a number");
  need(j, "seed", is_int, "an integer");
  need(j, "rng", is_str, "a string");
  need(j, "windows", is_int, "an integer");
  need(j, "Ts_min", is_num, "a number");
  need(j, "dt_s", is_num, "a number");
  need(j, "metrics_channel", [](const json& v) { return v == "measured" || v == "true"; }, "measured|true");
  need(j, "iae_rule", is_str, "a string");
  need(j, "scenarios_per_window", is_int, "an integer");
  need(j, "locked_windows", is_int, "an integer");
  need(j, "ef_max_windows", is_int, "an integer");
  need(j, "metrics", [](const json& v) { return v.is_object(); }, "an object");
  const json& m = j["metrics"];
  need(m, "rise_time_h", is_num_or_null, "a number or null");
  for (const char* k : {"peak", "overshoot_pct", "final_error", "iae"}) need(m, k, is_num, "a number");
  const double os = m["overshoot_pct"].get<double>();
  if (os < 0.0) throw ConfigError("summary: overshoot_pct must be >= 0");
  for (const char* k : {"settling_time_h", "time_in_band_pct", "band_entry_time_h"}) {
    need(m, k, [](const json& v) { return v.is_object(); }, "an object");
    for (const char* b : {"5%", "10%", "30%"}) {
      if (std::string(k) == "time_in_band_pct") {
        need(m[k], b, is_num, "a number");
        const double p = m[k][b].get<double>();
        if (p < 0.0 || p > 100.0) throw ConfigError("summary: time_in_band_pct out of [0,100]");
      } else {
        need(m[k], b, is_num_or_null, "a number or null");
      }
    }
  }
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("write failed for " + file.string());
}

void export_run(const RunResult& r, const fs::path& dir) {
  require_dir(dir);
  write_text(dir / "trace.csv", trace_csv(r.trace));
  write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
  write_text(dir / "config.json", config_echo(r.cfg));
}

void export_open_loop(const OpenLoopResult& r, const fs::path& dir) {
  require_dir(dir);
  std::string csv = "t_min";
  for (double a : r.amplitudes) csv += ",T4ext_A" + num(a);
  csv += '\n';
  for (std::size_t k = 0; k < r.t_min.size(); ++k) {
    csv += num(r.t_min[k]);
    for (const auto& tr : r.t4_ext) csv += "," + num(tr[k]);
    csv += '\n';
  }
  write_text(dir / "open_loop.csv", csv);
  ordered_json s = {{"kind", "open_loop"},
                    {"horizon_min", r.cfg.open_loop_horizon},
                    {"average_window_min", {r.cfg.open_loop_horizon / 2.0, r.cfg.open_loop_horizon}},
                    {"amplitudes", r.amplitudes},
                    {"late_mean_t4_ext", r.late_mean}};
  write_text(dir / "summary.json", s.dump(2) + "\n");
  write_text(dir / "config.json", config_echo(r.cfg));
}

void export_sweep(const SweepResult& r, const fs::path& dir) {
  require_dir(dir);
  auto cell = [](const std::optional<double>& v) { return v ? num(*v) : std::string("nan"); };
  std::string csv = "setpoint,rise_time_h,peak,overshoot_pct,final_error,settling_time_h,iae,in_band_5_pct\n";
  ordered_json rows = ordered_json::array();
  for (const auto& run : r.runs) {
    const RunMetrics& m = run.metrics;
    csv += num(run.cfg.setpoint) + "," + cell(m.rise_time) + "," + num(m.peak) + "," + num(m.overshoot_pct) + "," +
           num(m.final_error) + "," + cell(m.settling_time[0]) + "," + num(m.iae) + "," +
           num(m.time_in_band_pct[0]) + "\n";
    rows.push_back(summary_json(run));
    export_run(run, make_subdir(dir, setpoint_label(run.cfg.setpoint)));
  }
  write_text(dir / "sweep_summary.csv", csv);
  write_text(dir / "sweep_summary.json", ordered_json{{"controller", to_string(r.cfg.controller)}, {"runs", rows}}.dump(2) + "\n");
  write_text(dir / "config.json", config_echo(r.cfg));
}

void export_time_resolution(const TimeResResult& r, const fs::path& dir) {
  require_dir(dir);
  export_run(r.coarse, make_subdir(dir, "coarse"));
  export_run(r.fine, make_subdir(dir, "fine"));
  ordered_json s = {{"kind", "time_resolution"},
                    {"controller", to_string(r.cfg.controller)},
                    {"setpoint", r.cfg.setpoint},
                    {"dt_coarse_s", r.coarse.cfg.dt_s},
                    {"dt_fine_s", r.fine.cfg.dt_s},
                    {"burst_snapping", "EF sampled at each step midpoint (nearest grid point)"},
                    {"max_diff", r.max_diff},
                    {"rms_diff", r.rms_diff},
                    {"rms_diff_pct_of_setpoint", 100.0 * r.rms_diff / r.cfg.setpoint}};
  write_text(dir / "summary.json", s.dump(2) + "\n");
  write_text(dir / "config.json", config_echo(r.cfg));
}

void export_compare(const CompareResult& r, const fs::path& dir) {
  require_dir(dir);
  export_run(r.apid, make_subdir(dir, "apid"));
  export_run(r.rapid, make_subdir(dir, "rapid"));
  ordered_json s = {{"kind", "compare"},
                    {"setpoint", r.cfg.setpoint},
                    {"seed", r.cfg.seed},
                    {"apid", metrics_json(r.apid.metrics)},
                    {"rapid", metrics_json(r.rapid.metrics)}};
  write_text(dir / "summary.json", s.dump(2) + "\n");
  write_text(dir / "config.json", config_echo(r.cfg));
}

fs::path resolve_output_dir(const std::string& output_dir) {
  fs::path p(output_dir);
  if (p.is_relative())
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) p = fs::path(root) / p;
  return p;
}

}  // namespace t4reg
