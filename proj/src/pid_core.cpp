#include "t4reg/pid_core.hpp"

#include <cmath>

#include "t4reg/actuator.hpp"
#include "t4reg/errors.hpp"

namespace t4reg {

void PidConfig::validate() const {
  if (!(alpha_d > 0.0 && alpha_d <= 1.0)) throw ConfigError("pid: alpha_d must lie in (0,1]");
  if (!(I_leak >= 0.0 && I_leak < 1.0)) throw ConfigError("pid: I_leak must lie in [0,1)");
  if (!(I_max > 0.0)) throw ConfigError("pid: I_max must be > 0");
  if (!(K_b_aw >= 0.0)) throw ConfigError("pid: K_b_aw must be >= 0");
  if (!(e_small > 0.0) || !(e_small_rel > 0.0)) throw ConfigError("pid: e_small must be > 0");
  if (!(gamma_flip > 0.0 && gamma_flip < 1.0)) throw ConfigError("pid: gamma_flip must lie in (0,1)");
  if (!(Ts > 0.0)) throw ConfigError("pid: Ts must be > 0");
}

double update_derivative(double z, const PidState& st, const PidConfig& cfg) {
  const double z_prev = st.primed ? st.z_prev : z;
  const double d = (z - z_prev) / cfg.Ts;
  return (1.0 - cfg.alpha_d) * st.d_filt + cfg.alpha_d * d;
}

double effective_ki(double ki, double e, const PidConfig& cfg) {
  return std::abs(e) < cfg.e_small ? 1.25 * ki : ki;
}

double update_integral(double I, double e, const PidConfig& cfg) {
  return saturate((1.0 - cfg.I_leak) * I + e * cfg.Ts, -cfg.I_max, cfg.I_max);
}

double pid_command(const PidGains& g, double ki_eff, double e, double I, double d_filt) {
  return g.kp * e + ki_eff * I - g.kd * d_filt;
}

double anti_windup(double I, double ef_applied, double ef_unsat, const PidConfig& cfg) {
  return I + cfg.K_b_aw * (ef_applied - ef_unsat) * cfg.Ts;
}

FlipResult sign_flip_guard(double e, double e_prev, double I, double kp, const PidConfig& cfg) {
  // A zero error on either side never counts as a sign change.
  const bool flip = (e < 0.0 && e_prev > 0.0) || (e > 0.0 && e_prev < 0.0);
  if (!flip) return {I, kp, false};
  return {0.5 * I, cfg.gamma_flip * kp, true};
}

}  // namespace t4reg
