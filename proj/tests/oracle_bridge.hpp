#pragma once

// Converts library structs into the oracle's plain inputs.

#include "oracle.hpp"
#include "t4reg/apid.hpp"

namespace oracle {

inline oracle::Params to_oracle(const t4reg::PlantParams& p) {
  oracle::Params o;
  o.alpha1 = p.alpha1;
  o.K = p.K;
  o.n = p.n;
  o.gamma1 = p.gamma1;
  o.a = p.a;
  o.alpha = p.alpha;
  o.beta = p.beta;
  o.c = p.c;
  o.kappa = p.kappa;
  o.K2 = p.K2;
  o.h = p.h;
  o.alpha_I = p.alpha_I;
  o.gamma_I = p.gamma_I;
  o.alpha_Tg = p.alpha_Tg;
  o.gamma_Tg = p.gamma_Tg;
  o.gamma_T4_int = p.gamma_T4_int;
  o.omega = p.omega;
  o.gamma_T4_ext = p.gamma_T4_ext;
  return o;
}

inline oracle::CostInput to_oracle(const t4reg::PidGains& phi, const t4reg::WindowSnapshot& s, const t4reg::ControllerConfig& c,
                            const t4reg::Scenario& sc) {
  oracle::CostInput o;
  o.y = s.plant.y;
  o.t0 = s.t;
  o.z = s.z;
  o.reference = s.reference;
  o.target = c.T4_des;
  o.z_prev = s.pid.z_prev;
  o.primed = s.pid.primed;
  o.d_f = s.pid.d_filt;
  o.integral = s.pid.integral;
  o.ef_prev = s.pid.ef;
  o.amp_prev = s.pid.amp;
  o.first_band_hit = s.lock.first_band_hit;
  o.A_basal = s.lock.A_basal;
  o.kp = phi.kp;
  o.ki = phi.ki;
  o.kd = phi.kd;
  o.Ts = c.pid.Ts;
  o.alpha_d = c.pid.alpha_d;
  o.e_small = c.pid.e_small;
  o.thr = c.act.thr;
  o.k_A = c.act.k_A;
  o.A_min = c.act.A_min;
  o.A_max = c.act.A_max;
  o.EF_min = c.act.EF_min;
  o.EF_max = c.act.EF_max;
  o.dEF_max = c.act.dEF_max;
  o.dA_max = c.act.dA_max;
  o.lambda_A = c.act.lambda_A;
  o.beta_ov = c.adapt.beta_ov;
  o.rho_A = c.adapt.rho_A;
  o.pulse_on = c.burst.t1 + c.burst.t3;
  o.pulse_period = c.burst.pulse_period();
  o.n_p = c.burst.n_p;
  o.t_gap = c.burst.t_gap;
  o.t6_min = c.burst.t6_min;
  o.g_A = sc.g_A;
  o.shift_s = sc.shift_s;
  o.d4 = {sc.d4.bias, sc.d4.amp, sc.d4.period, sc.d4.phase};
  o.p = to_oracle(sc.params);
  o.dt = c.dt;
  return o;
}

}  // namespace oracle
