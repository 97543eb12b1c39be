#include "t4reg/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace t4reg {

namespace {

inline double hill_pow(double x, double e) {
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  if (e == 4.0) return (x * x) * (x * x);
  return std::pow(x, e);
}

}  // namespace

double PlantState::min_component() const { return *std::min_element(y.begin(), y.end()); }

void PlantParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("plant parameter must be > 0: ") + name);
  };
  positive(alpha1, "alpha1");
  positive(K, "K");
  positive(gamma1, "gamma1");
  positive(a, "a");
  positive(alpha, "alpha");
  positive(beta, "beta");
  positive(kappa, "kappa");
  positive(K2, "K2");
  positive(alpha_I, "alpha_I");
  positive(gamma_I, "gamma_I");
  positive(alpha_Tg, "alpha_Tg");
  positive(gamma_Tg, "gamma_Tg");
  positive(gamma_T4_int, "gamma_T4_int");
  positive(omega, "omega");
  positive(gamma_T4_ext, "gamma_T4_ext");
  if (!(c >= 0.0)) throw ConfigError("plant parameter must be >= 0: c");
  if (!(n >= 1.0)) throw ConfigError("plant parameter must be >= 1: n");
  if (!(h >= 1.0)) throw ConfigError("plant parameter must be >= 1: h");
  if (N != 10) throw ConfigError("chain length N is fixed at 10");
}

double Disturbance::at(double t) const {
  if (amp == 0.0) return bias;
  return bias + amp * std::sin(2.0 * std::numbers::pi * t / period + phase);
}

double hill_promoter_rate(double ef, const PlantParams& p) {
  if (!(ef > 0.0)) return 0.0;
  const double en = hill_pow(ef, p.n);
  return p.alpha1 * en / (hill_pow(p.K, p.n) + en);
}

double k1_of_unk(double u_nk, const PlantParams& p) {
  if (!(u_nk > 0.0)) return 0.0;
  const double x = hill_pow(u_nk / p.K2, p.h);
  return p.kappa * x / (1.0 + x);
}

void derivatives_with_drive(const std::array<double, PlantState::kSize>& y, double drive,
                            double d4, const PlantParams& p,
                            std::array<double, PlantState::kSize>& dy) {
  using S = PlantState;
  dy[S::kUf] = drive - p.gamma1 * y[S::kUf];
  dy[S::kU1] = p.a * (y[S::kUf] - y[S::kU1]);
  for (std::size_t i = 1; i < S::kChain; ++i) dy[S::kU1 + i] = p.a * (y[S::kU1 + i - 1] - y[S::kU1 + i]);
  dy[S::kUnk] = p.alpha * y[S::kU1 + S::kChain - 1] - p.beta * y[S::kUnk] + p.c;

  const double k1 = k1_of_unk(y[S::kUnk], p);
  const double flux = k1 * y[S::kTg] * y[S::kI];
  dy[S::kI] = -flux - p.gamma_I * y[S::kI] + p.alpha_I;
  dy[S::kT4Int] = flux - p.omega * y[S::kT4Int] - p.gamma_T4_int * y[S::kT4Int];
  dy[S::kTg] = p.alpha_Tg - flux - p.gamma_Tg * y[S::kTg];
  dy[S::kT4Ext] = p.omega * y[S::kT4Int] - p.gamma_T4_ext * y[S::kT4Ext] + d4;
}

PlantState derivatives(const PlantState& s, double ef, double d4, const PlantParams& p) {
  PlantState out;
  derivatives_with_drive(s.y, hill_promoter_rate(ef, p), d4, p, out.y);
  return out;
}

int steps_per_window(double Ts, double dt) {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (Ts < 0.0) throw ConfigError("window length must be >= 0");
  const double ratio = Ts / dt;
  const long long n = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("dt must divide the window length");
  return static_cast<int>(n);
}

Trajectory integrate_window(const PlantState& s0, const EfSchedule& sched, const Disturbance& d4,
                            const PlantParams& p, double dt) {
  const int n = steps_per_window(sched.Ts, dt);
  Trajectory tr;
  tr.times.reserve(n + 1);
  tr.states.reserve(n + 1);
  tr.ef_eff.reserve(n + 1);
  propagate(s0, sched, d4, p, n, [&](int, double t, const PlantState& s, double ef) {
    tr.times.push_back(t);
    tr.states.push_back(s);
    tr.ef_eff.push_back(ef);
  });
  return tr;
}

PlantState advance_window(const PlantState& s0, const EfSchedule& sched, const Disturbance& d4,
                          const PlantParams& p, double dt) {
  const int n = steps_per_window(sched.Ts, dt);
  return propagate(s0, sched, d4, p, n, [](int, double, const PlantState&, double) {});
}

PlantState steady_state(double ef_const, const PlantParams& p) {
  using S = PlantState;
  PlantState s;
  const double uf = hill_promoter_rate(ef_const, p) / p.gamma1;
  s.y[S::kUf] = uf;
  for (std::size_t i = 0; i < S::kChain; ++i) s.y[S::kU1 + i] = uf;
  const double unk = (p.alpha * uf + p.c) / p.beta;
  s.y[S::kUnk] = unk;

  // Core balance: flux f = k1 * Tg * I with I = (alpha_I - f)/gamma_I and
  // Tg = (alpha_Tg - f)/gamma_Tg; g(f) is strictly decreasing on [0, fmax].
  const double k1 = k1_of_unk(unk, p);
  const double scale = k1 / (p.gamma_I * p.gamma_Tg);
  auto g = [&](double f) { return scale * (p.alpha_I - f) * (p.alpha_Tg - f) - f; };
  auto dg = [&](double f) { return -scale * ((p.alpha_I - f) + (p.alpha_Tg - f)) - 1.0; };
  double lo = 0.0;
  double hi = std::min(p.alpha_I, p.alpha_Tg);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double f = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double step = g(f) / dg(f);
    if (!std::isfinite(step)) break;
    f -= step;
  }
  s.y[S::kI] = (p.alpha_I - f) / p.gamma_I;
  s.y[S::kTg] = (p.alpha_Tg - f) / p.gamma_Tg;
  const double flux = k1 * s.y[S::kTg] * s.y[S::kI];
  s.y[S::kT4Int] = flux / (p.omega + p.gamma_T4_int);
  s.y[S::kT4Ext] = p.omega * s.y[S::kT4Int] / p.gamma_T4_ext;

  const PlantState r = derivatives(s, ef_const, 0.0, p);
  double norm2 = 0.0;
  for (double v : r.y) norm2 += v * v;
  if (!(std::sqrt(norm2) < 1e-10))
    throw NoConvergence("steady state residual " + std::to_string(std::sqrt(norm2)) + " exceeds 1e-10");
  return s;
}

}  // namespace t4reg
