#pragma once

#include "t4reg/schedule.hpp"

namespace t4reg {

// Micro-pulse and burst timing, all in seconds.
struct BurstConfig {
  double t1 = 0.025;
  double t2 = 0.025;
  double t3 = 0.025;
  double t4 = 0.025;
  int n_p = 10;
  double t_gap = 2.0;
  double t6_min = 30.0;

  double pulse_period() const { return t1 + t2 + t3 + t4; }
  double duty() const { return (t1 + t3) / pulse_period(); }
  double burst_on() const { return n_p * pulse_period(); }
  double burst_period() const { return burst_on() + t_gap; }
  void validate() const;
};

struct ActuatorConfig {
  double thr = 1e-4;
  double k_A = 0.20;
  double A_min = 0.0;
  double A_max = 0.10;
  double EF_min = 0.0;
  double EF_max = 100.0;
  double dEF_max = 25.0;
  double dA_max = 25.0 * 0.20;
  double lambda_A = 0.2;

  void validate() const;
};

inline double saturate(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }

// Thresholded affine command-to-amplitude map.
double amplitude_map(double u, const ActuatorConfig& cfg);
double inverse_amplitude_map(double A, const ActuatorConfig& cfg);

// x_prev + clamp(x - x_prev, -delta, delta)
double rate_limit(double x, double x_prev, double delta);

// EF rate limit followed by command saturation.
inline double limit_command(double ef_unsat, double ef_prev, const ActuatorConfig& cfg) {
  return saturate(rate_limit(ef_unsat, ef_prev, cfg.dEF_max), cfg.EF_min, cfg.EF_max);
}
// Amplitude rate limit followed by amplitude bounds.
inline double limit_amplitude(double A, double A_prev, const ActuatorConfig& cfg) {
  return saturate(rate_limit(A, A_prev, cfg.dA_max), cfg.A_min, cfg.A_max);
}

EfSchedule build_schedule(double A, double t_start, double Ts, const BurstConfig& b);

// Gain mismatch and timing shift (seconds) applied to one window; content
// shifted past the window end is dropped and the vacated head is zero.
EfSchedule perturb_schedule(const EfSchedule& sched, double g_A, double tau_A, double nu);

}  // namespace t4reg
