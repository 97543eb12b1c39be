#include "t4reg/rapid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "t4reg/errors.hpp"
#include "t4reg/kernels.hpp"

namespace t4reg {

UncertaintyConfig UncertaintyConfig::none() {
  UncertaintyConfig c;
  c.rel.fill(0.0);
  c.b_d4_half = 0.0;
  c.a_d4_max = 0.0;
  c.g_A_half = 0.0;
  c.tau_A_max = 0.0;
  c.sigma_A_max = 0.0;
  c.sigma_eta = 0.0;
  c.b_eta = 0.0;
  return c;
}

void UncertaintyConfig::validate() const {
  for (double r : rel)
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("uncertainty: relative half-widths must lie in [0,1)");
  if (!(b_d4_half >= 0.0 && a_d4_max >= 0.0 && P_d4 > 0.0)) throw ConfigError("uncertainty: bad disturbance range");
  if (!(g_A_half >= 0.0 && tau_A_max >= 0.0 && sigma_A_max >= 0.0)) throw ConfigError("uncertainty: bad actuator range");
  if (!(sigma_eta >= 0.0)) throw ConfigError("uncertainty: sigma_eta must be >= 0");
}

PlantParams Perturbation::apply(const PlantParams& p) const {
  PlantParams q = p;
  double* fields[12] = {&q.alpha1,  &q.K,        &q.gamma1,   &q.alpha,        &q.kappa, &q.K2,
                        &q.gamma_I, &q.alpha_Tg, &q.gamma_Tg, &q.gamma_T4_int, &q.omega, &q.gamma_T4_ext};
  for (int i = 0; i < 12; ++i) *fields[i] *= mult[i];
  return q;
}

Perturbation sample_perturbation(Rng& rng, const UncertaintyConfig& cfg) {
  Perturbation p;
  for (int i = 0; i < 12; ++i) p.mult[i] = rng.uniform(1.0 - cfg.rel[i], 1.0 + cfg.rel[i]);
  p.b_d4 = rng.uniform(-cfg.b_d4_half, cfg.b_d4_half);
  p.a_d4 = rng.uniform(0.0, cfg.a_d4_max);
  p.P_d4 = cfg.P_d4;
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  p.phi_d4 = cfg.a_d4_max > 0.0 ? phase : 0.0;
  p.g_A = rng.uniform(-cfg.g_A_half, cfg.g_A_half);
  p.tau_A = rng.uniform(0.0, cfg.tau_A_max);
  p.sigma_A = rng.uniform(0.0, cfg.sigma_A_max);
  return p;
}

double disturbance_d4(double t, const Perturbation& pert) { return pert.disturbance().at(t); }

double measure(double z_true, const MeasurementPipeline& pipe, Rng& rng) {
  const double eta = rng.normal();
  return z_true + pipe.b_eta + pipe.sigma_eta * eta;
}

double filter_and_correct(double raw, MeasurementPipeline& pipe) {
  pipe.z_f = pipe.primed ? (1.0 - pipe.alpha_f) * pipe.z_f + pipe.alpha_f * raw : raw;
  pipe.primed = true;
  return pipe.z_f - pipe.b_hat;
}

double filtered_reference(double T4_des, double t, double tau_r) {
  if (!(tau_r > 0.0)) return T4_des;
  return T4_des * (1.0 - std::exp(-t / tau_r));
}

double stable_mean(std::span<const double> xs) {
  if (xs.empty()) throw EmptyList("mean of an empty list");
  double acc = 0.0;
  for (double x : xs) acc += x - xs[0];
  return xs[0] + acc / static_cast<double>(xs.size());
}

double cvar(std::span<const double> costs, double q) {
  if (costs.empty()) throw EmptyList("CVaR of an empty list");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("CVaR level q must lie in (0,1)");
  std::vector<double> sorted(costs.begin(), costs.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto M = sorted.size();
  // The 1e-12 keeps exact products such as (1-0.75)*4 from rounding up.
  auto k = static_cast<std::size_t>(std::ceil((1.0 - q) * static_cast<double>(M) - 1e-12));
  k = std::clamp<std::size_t>(k, 1, M);
  return stable_mean(std::span<const double>(sorted.data(), k));
}

void RobustConfig::validate() const {
  if (M < 1) throw ConfigError("robust: M must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("robust: lambda must lie in [0,1]");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("robust: q must lie in (0,1)");
  if (!(alpha_f > 0.0 && alpha_f <= 1.0)) throw ConfigError("robust: alpha_f must lie in (0,1]");
  if (calibration_windows < 0) throw ConfigError("robust: calibration_windows must be >= 0");
}

double combine_robust(std::span<const double> costs, const RobustConfig& rc) {
  const double m = stable_mean(costs);
  if (rc.lambda == 0.0) return m;
  return m + rc.lambda * (cvar(costs, rc.q) - m);
}

Scenario make_scenario(const ScenarioDraw& d, const PlantParams& nominal) {
  return Scenario{d.pert.apply(nominal), d.pert.disturbance(), d.pert.g_A, d.pert.tau_A + d.nu};
}

double robust_cost(const PidGains& phi, const WindowSnapshot& snap, const std::vector<Scenario>& scenarios,
                   const RobustConfig& rc, const ControllerConfig& cfg) {
  const std::vector<double> J = kernels::scenario_costs({phi}, scenarios, snap, cfg, kernels::default_exec());
  return combine_robust(J, rc);
}

RapidState initial_rapid_state(const ControllerConfig& cfg, const RobustConfig& rc, const UncertaintyConfig& ucfg,
                               const PlantState& model0) {
  RapidState st;
  st.ctrl = initial_controller_state(cfg);
  st.pipe.sigma_eta = ucfg.sigma_eta;
  st.pipe.b_eta = ucfg.b_eta;
  st.pipe.alpha_f = rc.alpha_f;
  st.model = model0;
  st.calibrated = rc.calibration_windows == 0;
  return st;
}

RapidOutcome rapid_step(double raw, double t, RapidState& st, const ControllerConfig& cfg, const RobustConfig& rc,
                        const UncertaintyConfig& ucfg, Rng& rng) {
  std::vector<Scenario> scenarios;
  scenarios.reserve(rc.M);
  for (int i = 0; i < rc.M; ++i) {
    ScenarioDraw d;
    d.pert = sample_perturbation(rng, ucfg);
    d.nu = rng.uniform(-d.pert.sigma_A, d.pert.sigma_A);
    scenarios.push_back(make_scenario(d, cfg.model));
  }

  RapidOutcome out;
  out.scenarios = rc.M;
  out.reference = filtered_reference(cfg.T4_des, t, rc.tau_r);

  if (!st.calibrated) {
    const double z_used = filter_and_correct(raw, st.pipe);
    st.calib_sum += raw;
    if (st.window + 1 == rc.calibration_windows) {
      const double basal = steady_state(0.0, cfg.model).t4_ext();
      st.pipe.b_hat = st.calib_sum / rc.calibration_windows - basal;
      st.calibrated = true;
    }
    out.z_used = z_used;
    out.step.e = out.reference - z_used;
    out.step.cost = std::numeric_limits<double>::quiet_NaN();
    out.step.gains = st.ctrl.gains;
    out.step.ef = 0.0;
    out.step.amp = 0.0;
    st.ctrl.pid.ef = 0.0;
    st.ctrl.pid.amp = 0.0;
  } else {
    const double z_used = filter_and_correct(raw, st.pipe);
    out.z_used = z_used;
    WindowSnapshot snap{st.model, t, z_used, out.reference, st.ctrl.pid, st.ctrl.lock};
    BatchCost cost = [&](const std::vector<PidGains>& probes) {
      const std::vector<double> J = kernels::scenario_costs(probes, scenarios, snap, cfg, kernels::default_exec());
      std::vector<double> per_probe(probes.size());
      for (std::size_t p = 0; p < probes.size(); ++p)
        per_probe[p] = combine_robust(std::span<const double>(J.data() + p * scenarios.size(), scenarios.size()), rc);
      return per_probe;
    };
    out.step = controller_update(z_used, out.reference, st.ctrl, cfg, cost);
    // The robust cost is logged every window, including held (locked) ones.
    if (std::isnan(out.step.cost)) out.step.cost = cost({out.step.gains}).front();
  }

  const EfSchedule sched = build_schedule(out.step.amp, t, cfg.pid.Ts, cfg.burst);
  st.model = advance_window(st.model, sched, Disturbance{}, cfg.model, cfg.dt);
  st.window += 1;
  return out;
}

}  // namespace t4reg
