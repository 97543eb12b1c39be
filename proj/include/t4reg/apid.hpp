#pragma once

#include <array>
#include <functional>
#include <vector>

#include "t4reg/actuator.hpp"
#include "t4reg/pid_core.hpp"
#include "t4reg/plant.hpp"

namespace t4reg {

struct AdaptConfig {
  // Only ki adapts by default; kp and kd are pinned by their bounds.
  std::array<double, 3> alpha_phi{0.0, 1.0, 0.0};
  std::array<double, 3> dphi_max{0.0, 1.0, 0.0};
  std::array<double, 3> phi_min{2.921e-3, 7.117e-7, 19.28};
  std::array<double, 3> phi_max{2.921e-3, 1.0, 19.28};
  double lambda = 0.5;
  // Finite-difference perturbation: eps_j = max(eps_abs, eps_rel * |phi_j|).
  double eps_abs = 1e-12;
  double eps_rel = 0.05;
  double beta_ov = 4.0;
  double rho_A = 10.0;

  std::array<double, 3> eps(const PidGains& phi) const;
  void validate() const;
};

struct BandLockConfig {
  double eta_in = 0.05;
  double eta_out = 0.5591;
  double k_lock = 2.449e-4;
  double eta_basal = 7.345e-8;

  void validate() const;
};

struct LockState {
  bool locked = false;
  double A_basal = 0.0;
  bool first_band_hit = false;
};

// Everything the per-window control law needs, including the model used for
// one-window predictions.
struct ControllerConfig {
  double T4_des = 25.0;
  PidGains phi0{2.921e-3, 4.027e-3, 19.28};
  double ef0 = 0.0;
  double amp0 = 0.0;
  PidConfig pid;
  AdaptConfig adapt;
  BandLockConfig lock;
  ActuatorConfig act;
  BurstConfig burst;
  PlantParams model;
  double dt = 1.0 / 60.0;  // min
  bool adapt_gains = true;
  bool band_lock = true;

  void validate() const;
};

struct ControllerState {
  PidGains gains;
  PidState pid;
  LockState lock;
  int window = 0;
};

ControllerState initial_controller_state(const ControllerConfig& cfg);

// Inputs to the one-window predictive cost: the plant state at t_m and the
// controller memory before this window's update.
struct WindowSnapshot {
  PlantState plant;
  double t = 0.0;          // t_m, min
  double z = 0.0;          // sample used by the controller
  double reference = 0.0;  // reference the PID error is formed against
  PidState pid;
  LockState lock;
};

// Plant model, disturbance, and actuator mismatch used by one rollout.
struct Scenario {
  PlantParams params;
  Disturbance d4;
  double g_A = 0.0;
  double shift_s = 0.0;  // tau_A + nu, seconds
};

inline Scenario nominal_scenario(const ControllerConfig& cfg) { return Scenario{cfg.model, {}, 0.0, 0.0}; }

// Amplitude the trial PID update would apply with gains phi.
double trial_amplitude(const PidGains& phi, const WindowSnapshot& snap, const ControllerConfig& cfg);

double window_cost(const PidGains& phi, const WindowSnapshot& snap, const ControllerConfig& cfg,
                   const Scenario& sc);
inline double window_cost(const PidGains& phi, const WindowSnapshot& snap, const ControllerConfig& cfg) {
  return window_cost(phi, snap, cfg, nominal_scenario(cfg));
}

// Costs for a list of candidate gains, one entry per candidate.
using BatchCost = std::function<std::vector<double>(const std::vector<PidGains>&)>;

struct Gradient {
  std::array<double, 3> g{};
  double cost = 0.0;  // cost at phi itself
};

// Central differences; the batch is evaluated as [phi, phi+e1, phi-e1, ...].
Gradient fd_gradient(const PidGains& phi, const std::array<double, 3>& eps, const BatchCost& cost);

PidGains gain_update(const PidGains& phi, const std::array<double, 3>& g, const AdaptConfig& cfg);

struct LockTransition {
  LockState state;
  bool entered = false;
  bool released = false;
};

LockTransition lock_supervisor(double e_true, const LockState& lock, double amp_now,
                               const BandLockConfig& cfg, double T4_des);

struct BandLockOutput {
  double amp;
  double ef;
  double A_basal;
};

BandLockOutput band_lock_update(double e_true, double amp_now, double ef_now, double A_basal,
                                const BandLockConfig& lock, const ActuatorConfig& act);

struct StepOutcome {
  double ef = 0.0;    // command applied on the coming window
  double amp = 0.0;   // amplitude applied on the coming window
  double e = 0.0;     // controller-side error
  double cost = 0.0;  // cost at the pre-update gains; NaN while locked
  bool locked = false;
  PidGains gains;     // gains after this update
};

// One window of the sampled-data law against an arbitrary cost oracle. The
// controller state is advanced in place.
StepOutcome controller_update(double z, double reference, ControllerState& st, const ControllerConfig& cfg,
                              const BatchCost& cost);

// Nominal-model APID step; plant is the state at t used for predictions.
StepOutcome apid_step(double z, const PlantState& plant, double t, ControllerState& st,
                      const ControllerConfig& cfg);

}  // namespace t4reg
