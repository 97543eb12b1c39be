#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "t4reg/apid.hpp"
#include "t4reg/rng.hpp"

namespace t4reg {

// Parameters carrying multiplicative uncertainty, in sampling order.
inline constexpr std::array<std::string_view, 12> kUncertainParams{
    "alpha1", "K",        "gamma1",       "alpha", "kappa",       "K2",
    "gamma_I", "alpha_Tg", "gamma_Tg", "gamma_T4_int", "omega", "gamma_T4_ext"};

struct UncertaintyConfig {
  // Relative half-widths, same order as kUncertainParams.
  std::array<double, 12> rel{0.08, 0.08, 0.08, 0.08, 0.10, 0.10, 0.08, 0.08, 0.08, 0.08, 0.08, 0.08};
  double b_d4_half = 0.01;
  double a_d4_max = 0.01;
  double P_d4 = 360.0;  // min
  double g_A_half = 0.10;
  double tau_A_max = 5.0;    // s
  double sigma_A_max = 2.0;  // s
  double sigma_eta = 0.8;
  double b_eta = 2.0;

  // All widths and measurement corruption zero.
  static UncertaintyConfig none();
  void validate() const;
};

struct Perturbation {
  std::array<double, 12> mult{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  double b_d4 = 0.0;
  double a_d4 = 0.0;
  double P_d4 = 360.0;
  double phi_d4 = 0.0;
  double g_A = 0.0;
  double tau_A = 0.0;    // s
  double sigma_A = 0.0;  // s

  PlantParams apply(const PlantParams& nominal) const;
  Disturbance disturbance() const { return {b_d4, a_d4, P_d4, phi_d4}; }
};

Perturbation sample_perturbation(Rng& rng, const UncertaintyConfig& cfg);

double disturbance_d4(double t, const Perturbation& pert);

struct MeasurementPipeline {
  double sigma_eta = 0.8;
  double b_eta = 2.0;  // true bias, hidden from the controller
  double alpha_f = 0.005;
  double b_hat = 0.0;
  double z_f = 0.0;
  bool primed = false;
};

double measure(double z_true, const MeasurementPipeline& pipe, Rng& rng);

// Exponential filter then bias correction; the first sample seeds the filter.
double filter_and_correct(double raw, MeasurementPipeline& pipe);

double filtered_reference(double T4_des, double t, double tau_r);

// Mean that is exact when all samples are equal.
double stable_mean(std::span<const double> xs);

// Mean of the ceil((1-q) M) largest samples.
double cvar(std::span<const double> costs, double q);

struct RobustConfig {
  int M = 8;
  double lambda = 0.5;
  double q = 0.8;
  double tau_r = 0.0;  // min; <= 0 disables the reference filter
  double alpha_f = 0.005;
  int calibration_windows = 4;

  void validate() const;
};

// (1 - lambda) mean + lambda CVaR, written so it equals the common value
// exactly when all scenario costs agree.
double combine_robust(std::span<const double> costs, const RobustConfig& rc);

struct ScenarioDraw {
  Perturbation pert;
  double nu = 0.0;  // per-rollout jitter, s
};

Scenario make_scenario(const ScenarioDraw& d, const PlantParams& nominal);

double robust_cost(const PidGains& phi, const WindowSnapshot& snap, const std::vector<Scenario>& scenarios,
                   const RobustConfig& rc, const ControllerConfig& cfg);

struct RapidState {
  ControllerState ctrl;
  MeasurementPipeline pipe;
  PlantState model;  // nominal-model state propagated with the commanded schedule
  int window = 0;    // windows seen, including calibration
  double calib_sum = 0.0;
  bool calibrated = false;
};

RapidState initial_rapid_state(const ControllerConfig& cfg, const RobustConfig& rc, const UncertaintyConfig& ucfg,
                               const PlantState& model0);

struct RapidOutcome {
  StepOutcome step;
  double z_used = 0.0;
  double reference = 0.0;
  int scenarios = 0;
};

// One RAPID window. Draws M scenario perturbations (plus their jitters) from
// rng, then either calibrates, holds the band lock, or runs the robust gain
// update and PID path. Also advances the controller's nominal model.
RapidOutcome rapid_step(double raw, double t, RapidState& st, const ControllerConfig& cfg, const RobustConfig& rc,
                        const UncertaintyConfig& ucfg, Rng& rng);

}  // namespace t4reg
