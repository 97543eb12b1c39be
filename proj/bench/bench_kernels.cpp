// Serial reference vs OpenMP rollout kernels on a RAPID-sized batch.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "t4reg/kernels.hpp"
#include "t4reg/rapid.hpp"

using namespace t4reg;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  ControllerConfig cfg;
  WindowSnapshot snap;
  snap.plant = steady_state(0.0, cfg.model);
  snap.z = snap.plant.t4_ext();
  snap.reference = cfg.T4_des;
  snap.pid.primed = true;
  snap.pid.z_prev = snap.z;
  snap.pid.integral = 600.0;
  snap.pid.ef = 0.3;

  RobustConfig rc;
  UncertaintyConfig u;
  Rng rng(1);
  std::vector<Scenario> scs;
  for (int i = 0; i < rc.M; ++i) {
    ScenarioDraw d;
    d.pert = sample_perturbation(rng, u);
    scs.push_back(make_scenario(d, cfg.model));
  }
  const PidGains g = cfg.phi0;
  std::vector<PidGains> probes(7, g);  // centre plus central differences
  for (int j = 0; j < 3; ++j) {
    probes[1 + 2 * j][j] *= 1.01;
    probes[2 + 2 * j][j] *= 0.99;
  }

  std::printf("threads %d, %zu probes x %zu scenarios, best of %d\n", kernels::max_threads(), probes.size(),
              scs.size(), reps);
  std::vector<double> a, b;
  const double ts = best_of(reps, [&] { a = kernels::scenario_costs(probes, scs, snap, cfg, kernels::Exec::serial); });
  const double tp = best_of(reps, [&] { b = kernels::scenario_costs(probes, scs, snap, cfg, kernels::Exec::parallel); });
  std::printf("scenario_costs  serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  identical %s\n", 1e3 * ts, 1e3 * tp,
              ts / tp, a == b ? "yes" : "NO");

  const double ws = best_of(reps, [&] { a = kernels::window_costs(probes, snap, cfg, scs[0], kernels::Exec::serial); });
  const double wp = best_of(reps, [&] { b = kernels::window_costs(probes, snap, cfg, scs[0], kernels::Exec::parallel); });
  std::printf("window_costs    serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  identical %s\n", 1e3 * ws, 1e3 * wp,
              ws / wp, a == b ? "yes" : "NO");
  return a == b ? 0 : 1;
}
