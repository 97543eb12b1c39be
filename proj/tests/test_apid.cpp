#include <cmath>
#include <random>

#include "doctest.h"
#include "t4reg/errors.hpp"
#include "oracle_bridge.hpp"
#include "t4reg/apid.hpp"
#include "t4reg/kernels.hpp"

using namespace t4reg;

namespace {

// Step sizes and bounds of the original gain scale, independent of the tuned defaults.
AdaptConfig unit_adapt() {
  AdaptConfig a;
  a.alpha_phi = {0.5, 0.01, 0.05};
  a.dphi_max = {1.0, 0.02, 0.1};
  a.phi_min = {0.0, 0.0, 0.0};
  a.phi_max = {50.0, 1.0, 10.0};
  a.lambda = 0.5;
  return a;
}

struct Fixture {
  ControllerConfig cfg;
  WindowSnapshot snap;
  Fixture() {
    cfg.pid.Ts = 20.0;
    cfg.dt = 1.0 / 60.0;
    snap.plant = steady_state(0.0, cfg.model);
    snap.z = snap.plant.t4_ext();
    snap.reference = cfg.T4_des;
  }
};

}  // namespace

TEST_CASE("window cost is zero when pinned at target with no actuation") {
  Fixture f;
  f.cfg.T4_des = f.snap.plant.t4_ext();
  f.snap.reference = f.cfg.T4_des;
  const double J = window_cost({0, 0, 0}, f.snap, f.cfg);
  CHECK(trial_amplitude({0, 0, 0}, f.snap, f.cfg) == 0.0);
  CHECK(J < 1e-20);
}

TEST_CASE("window cost reduces to the actuation term at zero tracking error") {
  Fixture f;
  f.cfg.T4_des = f.snap.plant.t4_ext();
  f.snap.reference = f.cfg.T4_des;
  // Error is zero at the sample, so the command comes from the integral memory.
  f.snap.pid.integral = 3000.0;
  const PidGains phi{0.0, 1e-4, 0.0};
  const double A = trial_amplitude(phi, f.snap, f.cfg);
  REQUIRE(A > 0.0);
  const double J = window_cost(phi, f.snap, f.cfg);
  // the delayed cascade keeps the output pinned within the window
  CHECK(J == doctest::Approx(f.cfg.adapt.rho_A * A * A).epsilon(1e-12));
}

TEST_CASE("window cost matches the straight-line oracle on random snapshots") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ControllerConfig c;
    c.pid.Ts = trial % 10 == 0 ? 120.0 : 10.0 + 10.0 * static_cast<int>(3 * U(gen));
    c.dt = 1.0 / 60.0;
    c.T4_des = 15.0 + 30.0 * U(gen);
    c.pid.e_small = 0.05 * c.T4_des;
    c.pid.alpha_d = 0.05 + 0.95 * U(gen);
    c.adapt.beta_ov = 1.0 + 4.0 * U(gen);
    c.adapt.rho_A = 20.0 * U(gen);

    WindowSnapshot s;
    s.plant = steady_state(0.5 * U(gen), c.model);
    for (auto& v : s.plant.y) v *= 0.7 + 0.6 * U(gen);
    s.t = 120.0 * static_cast<int>(100 * U(gen));
    s.z = s.plant.t4_ext() + U(gen) - 0.5;
    s.reference = trial % 3 == 0 ? c.T4_des * U(gen) : c.T4_des;
    s.pid.primed = U(gen) < 0.8;
    s.pid.z_prev = s.z + 4.0 * (U(gen) - 0.5);
    s.pid.d_filt = 0.05 * (U(gen) - 0.5);
    s.pid.integral = 5000.0 * (U(gen) - 0.3);
    s.pid.ef = 100.0 * U(gen) * U(gen);
    s.pid.amp = c.act.A_max * U(gen);
    s.lock.first_band_hit = U(gen) < 0.4;
    s.lock.A_basal = c.act.A_max * U(gen);

    const PidGains phi{3e-3 * U(gen), 2e-5 * U(gen), 40.0 * U(gen)};
    Scenario sc = nominal_scenario(c);
    if (trial % 2 == 1) {
      sc.params.alpha1 *= 0.92 + 0.16 * U(gen);
      sc.params.kappa *= 0.9 + 0.2 * U(gen);
      sc.params.omega *= 0.92 + 0.16 * U(gen);
      sc.d4 = {0.02 * (U(gen) - 0.5), 0.01 * U(gen), 360.0, 6.28 * U(gen)};
      sc.g_A = 0.2 * (U(gen) - 0.5);
      sc.shift_s = 7.0 * U(gen) - 2.0;
    }
    const double got = window_cost(phi, s, c, sc);
    const double want = oracle::window_cost(oracle::to_oracle(phi, s, c, sc));
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("fd_gradient is exact on a quadratic") {
  const PidGains phi{1.5, -0.25, 3.0};
  const BatchCost quad = [](const std::vector<PidGains>& ps) {
    std::vector<double> out;
    for (const auto& p : ps) out.push_back(p.kp * p.kp + p.ki * p.ki + p.kd * p.kd);
    return out;
  };
  const Gradient g = fd_gradient(phi, {0.125, 0.0625, 0.25}, quad);
  CHECK(std::abs(g.g[0] - 3.0) < 1e-10);
  CHECK(std::abs(g.g[1] + 0.5) < 1e-10);
  CHECK(std::abs(g.g[2] - 6.0) < 1e-10);
  CHECK(g.cost == doctest::Approx(1.5 * 1.5 + 0.0625 + 9.0));

  const BatchCost sym = [](const std::vector<PidGains>& ps) {
    std::vector<double> out;
    for (const auto& p : ps) out.push_back(p.kp + std::cos(p.kd));
    return out;
  };
  CHECK(fd_gradient({1.0, 0.0, 0.0}, {0.1, 0.1, 0.1}, sym).g[2] == 0.0);
}

TEST_CASE("central and one-sided differences agree on the real cost") {
  Fixture f;
  f.snap.pid.integral = 2000.0;
  f.snap.pid.primed = true;
  f.snap.pid.z_prev = f.snap.z - 0.2;
  const PidGains phi{1e-3, 2e-5, 5.0};
  ControllerConfig& c = f.cfg;
  const std::array<double, 3> eps{1e-6, 1e-8, 1e-3};
  const BatchCost cost = [&](const std::vector<PidGains>& ps) {
    return kernels::window_costs(ps, f.snap, c, nominal_scenario(c), kernels::Exec::serial);
  };
  const Gradient g = fd_gradient(phi, eps, cost);
  for (int j = 0; j < 3; ++j) {
    PidGains up = phi;
    up[j] += eps[j];
    const double one_sided = (window_cost(up, f.snap, c) - g.cost) / eps[j];
    CHECK(std::abs(one_sided - g.g[j]) <= 1e-3 * std::abs(g.g[j]) + 1e-6);
  }
}

TEST_CASE("gain update examples") {
  const AdaptConfig a = unit_adapt();
  const PidGains phi{5.0, 0.05, 0.5};
  CHECK(gain_update(phi, {0, 0, 0}, a) == phi);

  // small gradient: no normalisation
  const PidGains small = gain_update(phi, {0.6, 0.0, 0.0}, a);
  CHECK(small.kp == doctest::Approx(5.0 - a.lambda * a.alpha_phi[0] * 0.6));

  // at the upper bound with an outward step
  PidGains top{a.phi_max[0], a.phi_max[1], a.phi_max[2]};
  CHECK(gain_update(top, {-1e6, -1e6, -1e6}, a) == top);
}

TEST_CASE("gain update invariants") {
  const AdaptConfig a = unit_adapt();
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    PidGains phi;
    for (int j = 0; j < 3; ++j) phi[j] = a.phi_min[j] + (a.phi_max[j] - a.phi_min[j]) * U(gen);
    std::array<double, 3> g;
    for (auto& v : g) v = std::pow(10.0, 6.0 * U(gen) - 3.0) * (U(gen) < 0.5 ? -1.0 : 1.0);
    const PidGains out = gain_update(phi, g, a);
    for (int j = 0; j < 3; ++j) {
      CHECK(out[j] >= a.phi_min[j]);
      CHECK(out[j] <= a.phi_max[j]);
      CHECK(std::abs(out[j] - phi[j]) <= a.lambda * a.dphi_max[j] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("lock supervisor") {
  BandLockConfig b;
  const double T = 25.0;
  LockState open;
  auto tr = lock_supervisor(b.eta_in * T, open, 0.03, b, T);
  CHECK(tr.state.locked);
  CHECK(tr.entered);
  CHECK(tr.state.first_band_hit);
  CHECK(tr.state.A_basal == 0.03);

  const double mid = 0.5 * (b.eta_in + b.eta_out) * T;
  LockState locked = tr.state;
  tr = lock_supervisor(mid, locked, 0.05, b, T);
  CHECK(tr.state.locked);
  CHECK_FALSE(tr.released);
  CHECK(tr.state.A_basal == 0.03);

  tr = lock_supervisor(-mid, open, 0.05, b, T);
  CHECK_FALSE(tr.state.locked);

  tr = lock_supervisor(-b.eta_out * T, locked, 0.05, b, T);
  CHECK_FALSE(tr.state.locked);
  CHECK(tr.released);
  CHECK(tr.state.first_band_hit);
}

TEST_CASE("band lock holding law") {
  BandLockConfig b;
  ActuatorConfig a;
  auto out = band_lock_update(0.0, 0.04, inverse_amplitude_map(0.04, a), 0.04, b, a);
  CHECK(out.A_basal == 0.04);
  CHECK(out.amp == 0.04);

  out = band_lock_update(0.7, 0.04, 0.2, 0.04, b, a);
  CHECK(out.A_basal >= 0.04);

  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  ActuatorConfig tight = a;
  tight.dA_max = 0.002;
  for (int i = 0; i < 5000; ++i) {
    const double amp = a.A_max * U(gen);
    const double e = 40.0 * (U(gen) - 0.5);
    const auto r = band_lock_update(e, amp, inverse_amplitude_map(amp, tight), a.A_max * U(gen), b, tight);
    CHECK(std::abs(r.amp - amp) <= tight.dA_max * (1.0 + 1e-12));
    CHECK(r.A_basal >= a.A_min);
    CHECK(r.A_basal <= a.A_max);
    CHECK(r.ef >= a.EF_min);
    CHECK(r.ef <= a.EF_max);
  }
}

TEST_CASE("apid step with zero gains") {
  Fixture f;
  f.cfg.phi0 = {0, 0, 0};
  f.cfg.adapt.phi_min = {0, 0, 0};
  ControllerState st = initial_controller_state(f.cfg);
  const StepOutcome out = apid_step(f.snap.z, f.snap.plant, 0.0, st, f.cfg);
  CHECK(out.ef == 0.0);
  CHECK(out.amp == 0.0);
  CHECK_FALSE(out.locked);
  CHECK(st.window == 1);
}

TEST_CASE("locked windows leave the gains alone") {
  Fixture f;
  ControllerState st = initial_controller_state(f.cfg);
  st.lock.locked = true;
  st.lock.first_band_hit = true;
  st.lock.A_basal = 0.02;
  st.pid.amp = 0.02;
  st.gains = {f.cfg.adapt.phi_max[0], f.cfg.adapt.phi_max[1], f.cfg.adapt.phi_max[2]};
  const PidGains before = st.gains;
  const double z = f.cfg.T4_des * 1.01;
  const StepOutcome out = apid_step(z, f.snap.plant, 0.0, st, f.cfg);
  CHECK(out.locked);
  CHECK(st.gains == before);
  CHECK(std::isnan(out.cost));
}

TEST_CASE("serial and parallel kernels return identical costs") {
  Fixture f;
  f.snap.pid.integral = 1500.0;
  std::vector<PidGains> probes;
  for (int i = 0; i < 21; ++i) probes.push_back({1e-4 * i, 1e-6 * i, 0.5 * i});
  const auto a = kernels::window_costs(probes, f.snap, f.cfg, nominal_scenario(f.cfg), kernels::Exec::serial);
  const auto b = kernels::window_costs(probes, f.snap, f.cfg, nominal_scenario(f.cfg), kernels::Exec::parallel);
  REQUIRE(a.size() == probes.size());
  CHECK(a == b);

  std::vector<Scenario> scs;
  for (int i = 0; i < 5; ++i) {
    Scenario s = nominal_scenario(f.cfg);
    s.g_A = 0.02 * i;
    s.shift_s = 0.5 * i;
    s.params.kappa *= 1.0 + 0.01 * i;
    scs.push_back(s);
  }
  const auto c = kernels::scenario_costs(probes, scs, f.snap, f.cfg, kernels::Exec::serial);
  const auto d = kernels::scenario_costs(probes, scs, f.snap, f.cfg, kernels::Exec::parallel);
  CHECK(c == d);
  for (std::size_t p = 0; p < probes.size(); ++p)
    for (std::size_t s = 0; s < scs.size(); ++s) CHECK(c[p * scs.size() + s] == window_cost(probes[p], f.snap, f.cfg, scs[s]));
}

TEST_CASE("window cost is deterministic") {
  Fixture f;
  f.snap.pid.integral = 800.0;
  const PidGains phi{1e-3, 1e-5, 2.0};
  const double a = window_cost(phi, f.snap, f.cfg);
  for (int i = 0; i < 3; ++i) CHECK(window_cost(phi, f.snap, f.cfg) == a);
}

TEST_CASE("controller config validation") {
  ControllerConfig c;
  CHECK_NOTHROW(c.validate());
  c.phi0.kp = c.adapt.phi_max[0] * 2.0 + 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ControllerConfig{};
  c.lock.eta_in = c.lock.eta_out;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ControllerConfig{};
  c.adapt.lambda = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
