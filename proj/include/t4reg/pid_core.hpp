#pragma once

namespace t4reg {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;

  double& operator[](int j) { return j == 0 ? kp : (j == 1 ? ki : kd); }
  double operator[](int j) const { return j == 0 ? kp : (j == 1 ? ki : kd); }
  bool operator==(const PidGains&) const = default;
};

struct PidState {
  double integral = 0.0;
  double d_filt = 0.0;
  double z_prev = 0.0;
  double e_prev = 0.0;
  double ef = 0.0;   // command currently applied
  double amp = 0.0;  // amplitude currently applied
  bool primed = false;  // z_prev holds a real sample
};

struct PidConfig {
  double alpha_d = 1.0;
  double I_leak = 1.759e-5;
  double I_max = 1e9;
  double K_b_aw = 0.05;
  double e_small_rel = 0.05;  // threshold as a fraction of the setpoint
  double e_small = 1.25;      // absolute threshold, e_small_rel * T4_des once resolved
  double gamma_flip = 0.7;
  double Ts = 2.0;  // min

  void validate() const;
};

// New filtered derivative-on-measurement from sample z.
double update_derivative(double z, const PidState& st, const PidConfig& cfg);

double effective_ki(double ki, double e, const PidConfig& cfg);

// Leaky integral, clamped to [-I_max, I_max].
double update_integral(double I, double e, const PidConfig& cfg);

double pid_command(const PidGains& gains, double ki_eff, double e, double I, double d_filt);

// Back-calculation correction using the applied (saturated) command.
double anti_windup(double I, double ef_applied, double ef_unsat, const PidConfig& cfg);

struct FlipResult {
  double integral;
  double kp;
  bool triggered;
};
// Halves the integral and shrinks kp when the error changes sign strictly.
FlipResult sign_flip_guard(double e, double e_prev, double I, double kp, const PidConfig& cfg);

}  // namespace t4reg
