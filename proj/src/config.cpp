#include "t4reg/config.hpp"

#include <cmath>
#include <fstream>

#include "t4reg/errors.hpp"

namespace t4reg {

using nlohmann::json;
using nlohmann::ordered_json;

NLOHMANN_JSON_SERIALIZE_ENUM(Kind, {{Kind::open_loop, "open_loop"},
                                    {Kind::apid, "apid"},
                                    {Kind::fixed_pid, "fixed_pid"},
                                    {Kind::apid_no_bandlock, "apid_no_bandlock"},
                                    {Kind::rapid, "rapid"},
                                    {Kind::setpoint_sweep, "setpoint_sweep"},
                                    {Kind::time_resolution, "time_resolution"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PidGains, kp, ki, kd)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PlantParams, alpha1, K, n, gamma1, N, a, alpha, beta, c, kappa, K2,
                                                h, alpha_I, gamma_I, alpha_Tg, gamma_Tg, gamma_T4_int, omega,
                                                gamma_T4_ext)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BurstConfig, t1, t2, t3, t4, n_p, t_gap, t6_min)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ActuatorConfig, thr, k_A, A_min, A_max, EF_min, EF_max, dEF_max,
                                                dA_max, lambda_A)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PidConfig, alpha_d, I_leak, I_max, K_b_aw, e_small_rel, gamma_flip, Ts)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AdaptConfig, alpha_phi, dphi_max, phi_min, phi_max, lambda, eps_abs,
                                                eps_rel, beta_ov, rho_A)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BandLockConfig, eta_in, eta_out, k_lock, eta_basal)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RobustConfig, M, lambda, q, tau_r, alpha_f, calibration_windows)

std::string to_string(Kind k) { return json(k).get<std::string>(); }

Kind kind_from_string(const std::string& s) {
  static const char* names[] = {"open_loop", "apid", "fixed_pid", "apid_no_bandlock",
                                "rapid", "setpoint_sweep", "time_resolution"};
  for (const char* n : names)
    if (s == n) return json(s).get<Kind>();
  throw ConfigError("unknown experiment kind '" + s + "'");
}

bool is_controller_kind(Kind k) {
  return k == Kind::apid || k == Kind::fixed_pid || k == Kind::apid_no_bandlock || k == Kind::rapid;
}

void ExperimentConfig::resolve() {
  const Kind k = is_controller_kind(kind) ? kind : controller;
  ctrl.T4_des = setpoint;
  ctrl.pid.e_small = ctrl.pid.e_small_rel * setpoint;
  ctrl.dt = dt_s / 60.0;
  ctrl.adapt_gains = k != Kind::fixed_pid;
  ctrl.band_lock = k != Kind::fixed_pid && k != Kind::apid_no_bandlock;
}

int ExperimentConfig::windows() const {
  const double w = horizon / ctrl.pid.Ts;
  return static_cast<int>(std::llround(w));
}

void ExperimentConfig::validate() const {
  if (!is_controller_kind(controller)) throw ConfigError("experiment.controller must be a controller kind");
  if (!(setpoint > 0.0)) throw ConfigError("setpoint must be > 0");
  for (double s : setpoints)
    if (!(s > 0.0)) throw ConfigError("setpoints must be > 0");
  for (double a : amplitudes)
    if (!(a >= 0.0)) throw ConfigError("open-loop amplitudes must be >= 0");
  if (!(horizon > 0.0) || !(open_loop_horizon > 0.0)) throw ConfigError("horizon must be > 0 (empty trace)");
  const double w = horizon / ctrl.pid.Ts;
  if (std::abs(w - std::round(w)) > 1e-9 * w) throw ConfigError("horizon must be a multiple of Ts");
  const double wo = open_loop_horizon / ctrl.pid.Ts;
  if (std::abs(wo - std::round(wo)) > 1e-9 * wo) throw ConfigError("open-loop horizon must be a multiple of Ts");
  if (!(open_loop_trace_every > 0.0)) throw ConfigError("open-loop trace spacing must be > 0");
  if (!(dt_s > 0.0 && dt_coarse_s > 0.0 && dt_fine_s > 0.0)) throw ConfigError("dt must be > 0");
  steps_per_window(ctrl.pid.Ts, dt_coarse_s / 60.0);
  steps_per_window(ctrl.pid.Ts, dt_fine_s / 60.0);
  ctrl.validate();
  robust.validate();
  uncertainty.validate();
}

namespace {

ordered_json uncertainty_json(const UncertaintyConfig& u) {
  ordered_json rel = ordered_json::object();
  for (std::size_t i = 0; i < kUncertainParams.size(); ++i) rel[std::string(kUncertainParams[i])] = u.rel[i];
  return {{"rel", rel},           {"b_d4_half", u.b_d4_half},     {"a_d4_max", u.a_d4_max},
          {"P_d4", u.P_d4},       {"g_A_half", u.g_A_half},       {"tau_A_max", u.tau_A_max},
          {"sigma_A_max", u.sigma_A_max}, {"sigma_eta", u.sigma_eta}, {"b_eta", u.b_eta}};
}

UncertaintyConfig uncertainty_from(const json& j) {
  UncertaintyConfig u;
  if (j.contains("rel"))
    for (std::size_t i = 0; i < kUncertainParams.size(); ++i)
      u.rel[i] = j["rel"].value(std::string(kUncertainParams[i]), u.rel[i]);
  u.b_d4_half = j.value("b_d4_half", u.b_d4_half);
  u.a_d4_max = j.value("a_d4_max", u.a_d4_max);
  u.P_d4 = j.value("P_d4", u.P_d4);
  u.g_A_half = j.value("g_A_half", u.g_A_half);
  u.tau_A_max = j.value("tau_A_max", u.tau_A_max);
  u.sigma_A_max = j.value("sigma_A_max", u.sigma_A_max);
  u.sigma_eta = j.value("sigma_eta", u.sigma_eta);
  u.b_eta = j.value("b_eta", u.b_eta);
  return u;
}

void check_keys(const json& given, const ordered_json& ref, const std::string& path) {
  if (!given.is_object()) return;
  for (const auto& [key, val] : given.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!ref.contains(key)) throw ConfigError("unknown config key '" + here + "'");
    if (val.is_object() && ref[key].is_object()) check_keys(val, ref[key], here);
  }
}

template <class T>
T section(const json& j, const char* key) {
  if (!j.contains(key)) return T{};
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config section '") + key + "': " + e.what());
  }
}

}  // namespace

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["experiment"] = {{"kind", to_string(c.kind)},
                     {"controller", to_string(c.controller)},
                     {"setpoint", c.setpoint},
                     {"setpoints", c.setpoints},
                     {"amplitudes", c.amplitudes},
                     {"horizon_min", c.horizon},
                     {"open_loop_horizon_min", c.open_loop_horizon},
                     {"open_loop_trace_every_min", c.open_loop_trace_every},
                     {"seed", c.seed},
                     {"metrics_channel", c.metrics_on_true ? "true" : "measured"},
                     {"dt_s", c.dt_s},
                     {"dt_coarse_s", c.dt_coarse_s},
                     {"dt_fine_s", c.dt_fine_s},
                     {"output_dir", c.output_dir}};
  j["controller"] = {{"phi0", json(c.ctrl.phi0)}, {"ef0", c.ctrl.ef0}, {"amp0", c.ctrl.amp0}};
  j["pid"] = ordered_json(json(c.ctrl.pid));
  j["adapt"] = ordered_json(json(c.ctrl.adapt));
  j["band_lock"] = ordered_json(json(c.ctrl.lock));
  j["actuator"] = ordered_json(json(c.ctrl.act));
  j["burst"] = ordered_json(json(c.ctrl.burst));
  j["plant"] = ordered_json(json(c.ctrl.model));
  j["robust"] = ordered_json(json(c.robust));
  j["uncertainty"] = uncertainty_json(c.uncertainty);
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, to_json(ExperimentConfig{}), "");
  ExperimentConfig c;
  try {
    if (j.contains("experiment")) {
      const json& e = j["experiment"];
      if (e.contains("kind")) c.kind = kind_from_string(e["kind"].get<std::string>());
      if (e.contains("controller")) c.controller = kind_from_string(e["controller"].get<std::string>());
      c.setpoint = e.value("setpoint", c.setpoint);
      c.setpoints = e.value("setpoints", c.setpoints);
      c.amplitudes = e.value("amplitudes", c.amplitudes);
      c.horizon = e.value("horizon_min", c.horizon);
      c.open_loop_horizon = e.value("open_loop_horizon_min", c.open_loop_horizon);
      c.open_loop_trace_every = e.value("open_loop_trace_every_min", c.open_loop_trace_every);
      c.seed = e.value("seed", c.seed);
      const std::string ch = e.value("metrics_channel", std::string("measured"));
      if (ch != "measured" && ch != "true") throw ConfigError("metrics_channel must be 'measured' or 'true'");
      c.metrics_on_true = ch == "true";
      c.dt_s = e.value("dt_s", c.dt_s);
      c.dt_coarse_s = e.value("dt_coarse_s", c.dt_coarse_s);
      c.dt_fine_s = e.value("dt_fine_s", c.dt_fine_s);
      c.output_dir = e.value("output_dir", c.output_dir);
    }
    if (j.contains("controller")) {
      const json& k = j["controller"];
      if (k.contains("phi0")) c.ctrl.phi0 = k["phi0"].get<PidGains>();
      c.ctrl.ef0 = k.value("ef0", c.ctrl.ef0);
      c.ctrl.amp0 = k.value("amp0", c.ctrl.amp0);
    }
    c.ctrl.pid = section<PidConfig>(j, "pid");
    c.ctrl.adapt = section<AdaptConfig>(j, "adapt");
    c.ctrl.lock = section<BandLockConfig>(j, "band_lock");
    c.ctrl.act = section<ActuatorConfig>(j, "actuator");
    c.ctrl.burst = section<BurstConfig>(j, "burst");
    c.ctrl.model = section<PlantParams>(j, "plant");
    c.robust = section<RobustConfig>(j, "robust");
    if (j.contains("uncertainty")) c.uncertainty = uncertainty_from(j["uncertainty"]);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.resolve();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) throw ConfigError("bad override key '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null()) throw ConfigError("override path '" + path + "' crosses a value");
    pos = dot + 1;
  }
}

}  // namespace t4reg
