#include "t4reg/actuator.hpp"

#include <cmath>

#include "t4reg/errors.hpp"

namespace t4reg {

void BurstConfig::validate() const {
  if (!(t1 >= 0 && t2 >= 0 && t3 >= 0 && t4 >= 0)) throw ConfigError("burst phase durations must be >= 0");
  if (!(t1 + t3 > 0.0)) throw ConfigError("burst: t1 + t3 must be > 0");
  if (n_p < 1) throw ConfigError("burst: n_p must be >= 1");
  if (!(t_gap >= 0.0) || !(t6_min >= 0.0)) throw ConfigError("burst: t_gap and t6_min must be >= 0");
}

void ActuatorConfig::validate() const {
  if (!(A_min <= A_max)) throw ConfigError("actuator: A_min must be <= A_max");
  if (!(EF_min <= EF_max)) throw ConfigError("actuator: EF_min must be <= EF_max");
  if (!(dEF_max > 0.0) || !(dA_max > 0.0)) throw ConfigError("actuator: rate limits must be > 0");
  if (!(k_A > 0.0)) throw ConfigError("actuator: k_A must be > 0");
  if (!(lambda_A >= 0.0 && lambda_A < 1.0)) throw ConfigError("actuator: lambda_A must lie in [0,1)");
}

double amplitude_map(double u, const ActuatorConfig& cfg) {
  if (u < cfg.thr) return 0.0;
  return saturate(cfg.k_A * (u - cfg.thr), cfg.A_min, cfg.A_max);
}

double inverse_amplitude_map(double A, const ActuatorConfig& cfg) {
  if (A <= 0.0) return 0.0;
  return cfg.thr + A / cfg.k_A;
}

double rate_limit(double x, double x_prev, double delta) { return x_prev + saturate(x - x_prev, -delta, delta); }

EfSchedule build_schedule(double A, double t_start, double Ts, const BurstConfig& b) {
  EfSchedule s;
  s.t_start = t_start;
  s.Ts = Ts;
  s.burst_period_s = b.burst_period();
  s.burst_on_s = b.burst_on();
  // The 1e-9 guards the floor against minute/second round-off.
  const double nb = std::floor((Ts * 60.0 - b.t6_min) / s.burst_period_s + 1e-9);
  s.n_bursts = nb > 0.0 ? static_cast<int>(nb) : 0;
  s.level = s.n_bursts > 0 ? A * b.duty() : 0.0;
  return s;
}

EfSchedule perturb_schedule(const EfSchedule& sched, double g_A, double tau_A, double nu) {
  EfSchedule s = sched;
  s.level = sched.level * (1.0 + g_A);
  s.shift_s = sched.shift_s + tau_A + nu;
  return s;
}

}  // namespace t4reg
