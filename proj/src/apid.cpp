#include "t4reg/apid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "t4reg/errors.hpp"
#include "t4reg/kernels.hpp"

namespace t4reg {

std::array<double, 3> AdaptConfig::eps(const PidGains& phi) const {
  return {std::max(eps_abs, eps_rel * std::abs(phi.kp)), std::max(eps_abs, eps_rel * std::abs(phi.ki)),
          std::max(eps_abs, eps_rel * std::abs(phi.kd))};
}

void AdaptConfig::validate() const {
  for (int j = 0; j < 3; ++j) {
    if (!(phi_min[j] <= phi_max[j])) throw ConfigError("adapt: phi_min must be <= phi_max");
    if (!(alpha_phi[j] >= 0.0) || !(dphi_max[j] >= 0.0)) throw ConfigError("adapt: step sizes must be >= 0");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("adapt: lambda must lie in (0,1]");
  if (!(eps_abs > 0.0) || !(eps_rel >= 0.0)) throw ConfigError("adapt: eps must be > 0");
  if (!(beta_ov >= 1.0)) throw ConfigError("adapt: beta_ov must be >= 1");
  if (!(rho_A >= 0.0)) throw ConfigError("adapt: rho_A must be >= 0");
}

void BandLockConfig::validate() const {
  if (!(eta_in > 0.0 && eta_in < eta_out)) throw ConfigError("band lock: need 0 < eta_in < eta_out");
  if (!(k_lock >= 0.0) || !(eta_basal >= 0.0)) throw ConfigError("band lock: gains must be >= 0");
}

void ControllerConfig::validate() const {
  if (!(T4_des > 0.0)) throw ConfigError("setpoint must be > 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  pid.validate();
  adapt.validate();
  lock.validate();
  act.validate();
  burst.validate();
  model.validate();
  steps_per_window(pid.Ts, dt);
  for (int j = 0; j < 3; ++j)
    if (phi0[j] < adapt.phi_min[j] || phi0[j] > adapt.phi_max[j])
      throw ConfigError("initial gains must lie within the gain bounds");
}

ControllerState initial_controller_state(const ControllerConfig& cfg) {
  ControllerState st;
  st.gains = cfg.phi0;
  st.pid.ef = cfg.ef0;
  st.pid.amp = cfg.amp0;
  st.lock.A_basal = cfg.amp0;
  return st;
}

double trial_amplitude(const PidGains& phi, const WindowSnapshot& snap, const ControllerConfig& cfg) {
  const double e = snap.reference - snap.z;
  const double d_f = update_derivative(snap.z, snap.pid, cfg.pid);
  const double ki_eff = effective_ki(phi.ki, e, cfg.pid);
  const double I_tr = snap.pid.integral + e * cfg.pid.Ts;
  const double ef_unsat = pid_command(phi, ki_eff, e, I_tr, d_f);
  const double ef_tr = limit_command(ef_unsat, snap.pid.ef, cfg.act);
  // The back-calculated trial integral does not enter the one-window cost.
  const double a_smooth = (1.0 - cfg.act.lambda_A) * amplitude_map(ef_tr, cfg.act) + cfg.act.lambda_A * snap.pid.amp;
  double a_tr = limit_amplitude(a_smooth, snap.pid.amp, cfg.act);
  if (snap.lock.first_band_hit) a_tr = std::max(a_tr, 0.98 * snap.lock.A_basal);
  return a_tr;
}

double window_cost(const PidGains& phi, const WindowSnapshot& snap, const ControllerConfig& cfg,
                   const Scenario& sc) {
  const double a_tr = trial_amplitude(phi, snap, cfg);
  EfSchedule sched = build_schedule(a_tr, snap.t, cfg.pid.Ts, cfg.burst);
  if (sc.g_A != 0.0 || sc.shift_s != 0.0) sched = perturb_schedule(sched, sc.g_A, sc.shift_s, 0.0);

  const int n = steps_per_window(cfg.pid.Ts, cfg.dt);
  const double h = n > 0 ? cfg.pid.Ts / n : 0.0;
  const double target = cfg.T4_des;
  const double beta = cfg.adapt.beta_ov;
  double acc = 0.0;
  double prev = 0.0;
  propagate(snap.plant, sched, sc.d4, sc.params, n, [&](int k, double, const PlantState& s, double) {
    const double e = s.t4_ext() - target;
    const double f = e > 0.0 ? beta * e * e : e * e;
    if (k > 0) acc += 0.5 * h * (prev + f);
    prev = f;
  });
  return acc + cfg.adapt.rho_A * a_tr * a_tr;
}

Gradient fd_gradient(const PidGains& phi, const std::array<double, 3>& eps, const BatchCost& cost) {
  std::vector<PidGains> probes;
  probes.reserve(7);
  probes.push_back(phi);
  for (int j = 0; j < 3; ++j) {
    PidGains up = phi, dn = phi;
    up[j] += eps[j];
    dn[j] -= eps[j];
    probes.push_back(up);
    probes.push_back(dn);
  }
  const std::vector<double> J = cost(probes);
  Gradient out;
  out.cost = J[0];
  for (int j = 0; j < 3; ++j) out.g[j] = (J[1 + 2 * j] - J[2 + 2 * j]) / (2.0 * eps[j]);
  return out;
}

PidGains gain_update(const PidGains& phi, const std::array<double, 3>& g, const AdaptConfig& cfg) {
  const double norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
  const double safe = std::max(1.0, norm);
  PidGains out;
  for (int j = 0; j < 3; ++j) {
    const double step = saturate(-cfg.alpha_phi[j] * g[j] / safe, -cfg.dphi_max[j], cfg.dphi_max[j]);
    const double projected = saturate(phi[j] + step, cfg.phi_min[j], cfg.phi_max[j]);
    out[j] = saturate((1.0 - cfg.lambda) * phi[j] + cfg.lambda * projected, cfg.phi_min[j], cfg.phi_max[j]);
  }
  return out;
}

LockTransition lock_supervisor(double e_true, const LockState& lock, double amp_now,
                               const BandLockConfig& cfg, double T4_des) {
  LockTransition tr{lock, false, false};
  const double err = std::abs(e_true);
  if (!lock.locked && err <= cfg.eta_in * T4_des) {
    tr.state.locked = true;
    tr.state.first_band_hit = true;
    tr.state.A_basal = amp_now;
    tr.entered = true;
  } else if (lock.locked && err >= cfg.eta_out * T4_des) {
    tr.state.locked = false;
    tr.released = true;
  }
  return tr;
}

BandLockOutput band_lock_update(double e_true, double amp_now, double ef_now, double A_basal,
                                const BandLockConfig& lock, const ActuatorConfig& act) {
  const double basal = saturate(A_basal + lock.eta_basal * e_true, act.A_min, act.A_max);
  double amp = saturate(basal + lock.k_lock * e_true, act.A_min, act.A_max);
  amp = limit_amplitude(amp, amp_now, act);
  const double ef = limit_command(inverse_amplitude_map(amp, act), ef_now, act);
  return {amp, ef, basal};
}

StepOutcome controller_update(double z, double reference, ControllerState& st, const ControllerConfig& cfg,
                              const BatchCost& cost) {
  const double e = reference - z;
  const double e_true = cfg.T4_des - z;
  const double d_f = update_derivative(z, st.pid, cfg.pid);

  StepOutcome out;
  out.e = e;
  out.cost = std::numeric_limits<double>::quiet_NaN();

  if (cfg.band_lock) {
    const LockTransition tr = lock_supervisor(e_true, st.lock, st.pid.amp, cfg.lock, cfg.T4_des);
    st.lock = tr.state;
    if (tr.entered) st.pid.integral = 0.0;
  }

  if (st.lock.locked) {
    const BandLockOutput bl = band_lock_update(e_true, st.pid.amp, st.pid.ef, st.lock.A_basal, cfg.lock, cfg.act);
    st.lock.A_basal = bl.A_basal;
    out.ef = bl.ef;
    out.amp = bl.amp;
  } else {
    PidGains phi = st.gains;
    if (cfg.adapt_gains) {
      const Gradient grad = fd_gradient(phi, cfg.adapt.eps(phi), cost);
      out.cost = grad.cost;
      phi = gain_update(phi, grad.g, cfg.adapt);
    } else {
      out.cost = cost({phi}).front();
    }

    const FlipResult flip = sign_flip_guard(e, st.pid.e_prev, st.pid.integral, phi.kp, cfg.pid);
    double I = flip.integral;
    PidGains applied = phi;
    applied.kp = std::max(flip.kp, cfg.adapt_gains ? cfg.adapt.phi_min[0] : 0.0);
    // Frozen-gain runs keep phi0; the guard then only shapes this window's command.
    if (cfg.adapt_gains) phi = applied;

    const double ki_eff = effective_ki(applied.ki, e, cfg.pid);
    I = update_integral(I, e, cfg.pid);
    const double ef_unsat = pid_command(applied, ki_eff, e, I, d_f);
    const double ef_next = limit_command(ef_unsat, st.pid.ef, cfg.act);
    I = anti_windup(I, ef_next, ef_unsat, cfg.pid);
    double amp = limit_amplitude(amplitude_map(ef_next, cfg.act), st.pid.amp, cfg.act);
    if (st.lock.first_band_hit) amp = std::max(amp, 0.98 * st.lock.A_basal);

    st.gains = phi;
    st.pid.integral = I;
    out.ef = ef_next;
    out.amp = amp;
  }

  st.pid.z_prev = z;
  st.pid.primed = true;
  st.pid.e_prev = e;
  st.pid.d_filt = d_f;
  st.pid.ef = out.ef;
  st.pid.amp = out.amp;
  st.window += 1;
  out.locked = st.lock.locked;
  out.gains = st.gains;
  return out;
}

StepOutcome apid_step(double z, const PlantState& plant, double t, ControllerState& st,
                      const ControllerConfig& cfg) {
  WindowSnapshot snap{plant, t, z, cfg.T4_des, st.pid, st.lock};
  const Scenario nominal = nominal_scenario(cfg);
  BatchCost cost = [&](const std::vector<PidGains>& probes) {
    return kernels::window_costs(probes, snap, cfg, nominal, kernels::default_exec());
  };
  return controller_update(z, cfg.T4_des, st, cfg, cost);
}

}  // namespace t4reg
