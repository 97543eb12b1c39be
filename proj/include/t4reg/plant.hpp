#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "t4reg/errors.hpp"
#include "t4reg/schedule.hpp"

namespace t4reg {

// State of the sixteen-state EF-driven T4 production model.
// Storage order: I, T4int, Tg, T4ext, u_f, u_1..u_10, u_NK.
struct PlantState {
  static constexpr std::size_t kChain = 10;
  static constexpr std::size_t kSize = 16;
  enum Index : std::size_t { kI = 0, kT4Int = 1, kTg = 2, kT4Ext = 3, kUf = 4, kU1 = 5, kUnk = 15 };

  std::array<double, kSize> y{};

  double iodide() const { return y[kI]; }
  double t4_int() const { return y[kT4Int]; }
  double tg() const { return y[kTg]; }
  double t4_ext() const { return y[kT4Ext]; }
  double u_f() const { return y[kUf]; }
  double u_chain(std::size_t i) const { return y[kU1 + i]; }  // i = 0..9
  double u_nk() const { return y[kUnk]; }

  bool finite() const {
    for (double v : y)
      if (!std::isfinite(v)) return false;
    return true;
  }
  double min_component() const;
};

// Nominal rate constants; time unit is minutes.
struct PlantParams {
  // EF-responsive promoter
  double alpha1 = 3.308;
  double K = 1.195;
  double n = 2.0;
  double gamma1 = 0.0296;
  // linear chain
  int N = 10;
  double a = 0.001;
  // u_NK
  double alpha = 168.7624;
  double beta = 0.01;
  double c = 0.25;
  // k1 modulation
  double kappa = 1.0;
  double K2 = 1000.0;
  double h = 3.0;
  // thyroid core
  double alpha_I = 1.0;
  double gamma_I = 0.004;
  double alpha_Tg = 1.0;
  double gamma_Tg = 0.04;
  double gamma_T4_int = 0.1504;
  double omega = 0.15;
  double gamma_T4_ext = 0.01;

  // Throws ConfigError if any positivity constraint is violated.
  void validate() const;
};

// Additive exogenous disturbance on the T4ext equation:
// bias + amp * sin(2*pi*t/period + phase), t in minutes.
struct Disturbance {
  double bias = 0.0;
  double amp = 0.0;
  double period = 360.0;
  double phase = 0.0;

  bool zero() const { return bias == 0.0 && amp == 0.0; }
  double at(double t) const;
};

double hill_promoter_rate(double ef, const PlantParams& p);
double k1_of_unk(double u_nk, const PlantParams& p);

PlantState derivatives(const PlantState& s, double ef, double d4, const PlantParams& p);

// Right-hand side with the promoter drive already evaluated; the hot path of
// the integrator holds EF constant over a step so the Hill term is computed once.
void derivatives_with_drive(const std::array<double, PlantState::kSize>& y, double drive,
                            double d4, const PlantParams& p,
                            std::array<double, PlantState::kSize>& dy);

struct Trajectory {
  std::vector<double> times;  // min
  std::vector<PlantState> states;
  std::vector<double> ef_eff;  // EF applied on [times[k], times[k+1]); last entry repeats
};

// Number of fixed steps covering a window; throws ConfigError unless dt divides Ts.
int steps_per_window(double Ts, double dt);

// Classic RK4 over one window with EF sampled at each step midpoint (which
// snaps off-grid breakpoints to the nearest grid point). The observer is
// called as obs(k, t, state, ef) for k = 0..n_steps, where ef is the value
// held on the following step (the last one repeats).
template <class Observer>
PlantState propagate(const PlantState& s0, const EfSchedule& sched, const Disturbance& d4,
                     const PlantParams& p, int n_steps, Observer&& obs);

Trajectory integrate_window(const PlantState& s0, const EfSchedule& sched, const Disturbance& d4,
                            const PlantParams& p, double dt);

// Final state only.
PlantState advance_window(const PlantState& s0, const EfSchedule& sched, const Disturbance& d4,
                          const PlantParams& p, double dt);

// Fixed point of the model under constant EF; residual norm of the derivatives < 1e-10.
PlantState steady_state(double ef_const, const PlantParams& p);

// ---------------------------------------------------------------------------

template <class Observer>
PlantState propagate(const PlantState& s0, const EfSchedule& sched, const Disturbance& d4,
                     const PlantParams& p, int n_steps, Observer&& obs) {
  using Vec = std::array<double, PlantState::kSize>;
  PlantState s = s0;
  if (n_steps <= 0) {
    obs(0, sched.t_start, s, sched.level_at(0.0));
    return s;
  }
  const double h = sched.Ts / n_steps;
  const bool has_d4 = !d4.zero();
  Vec k1, k2, k3, k4, tmp;

  double ef = sched.level_at(0.5 * h);
  obs(0, sched.t_start, s, ef);
  for (int k = 0; k < n_steps; ++k) {
    const double t = sched.t_start + k * h;
    const double drive = hill_promoter_rate(ef, p);
    const double d_a = has_d4 ? d4.at(t) : 0.0;
    const double d_m = has_d4 ? d4.at(t + 0.5 * h) : 0.0;
    const double d_b = has_d4 ? d4.at(t + h) : 0.0;

    derivatives_with_drive(s.y, drive, d_a, p, k1);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = s.y[i] + 0.5 * h * k1[i];
    derivatives_with_drive(tmp, drive, d_m, p, k2);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = s.y[i] + 0.5 * h * k2[i];
    derivatives_with_drive(tmp, drive, d_m, p, k3);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = s.y[i] + h * k3[i];
    derivatives_with_drive(tmp, drive, d_b, p, k4);
    for (std::size_t i = 0; i < tmp.size(); ++i)
      s.y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    if (!s.finite()) throw NonFiniteState("plant state became non-finite at t=" + std::to_string(t + h));
    if (k + 1 < n_steps) ef = sched.level_at((k + 1.5) * h);
    obs(k + 1, sched.t_start + (k + 1) * h, s, ef);
  }
  return s;
}

}  // namespace t4reg
