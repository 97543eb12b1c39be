#include "t4reg/kernels.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace t4reg::kernels {

namespace {

#ifdef _OPENMP
Exec g_default = Exec::parallel;
#else
Exec g_default = Exec::serial;
#endif

// Runs body(i) for i in [0, n); exceptions from workers are rethrown on the caller.
template <class Body>
void for_each_index(long n, Exec exec, Body&& body) {
  if (exec == Exec::serial || n < 2) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(t4reg_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Exec default_exec() { return g_default; }
void set_default_exec(Exec e) { g_default = e; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<double> window_costs(const std::vector<PidGains>& probes, const WindowSnapshot& snap,
                                 const ControllerConfig& cfg, const Scenario& sc, Exec exec) {
  std::vector<double> out(probes.size());
  for_each_index(static_cast<long>(probes.size()), exec,
                 [&](long i) { out[i] = window_cost(probes[i], snap, cfg, sc); });
  return out;
}

std::vector<double> scenario_costs(const std::vector<PidGains>& probes, const std::vector<Scenario>& scenarios,
                                   const WindowSnapshot& snap, const ControllerConfig& cfg, Exec exec) {
  const long ns = static_cast<long>(scenarios.size());
  std::vector<double> out(probes.size() * scenarios.size());
  for_each_index(static_cast<long>(out.size()), exec, [&](long i) {
    out[i] = window_cost(probes[i / ns], snap, cfg, scenarios[i % ns]);
  });
  return out;
}

}  // namespace t4reg::kernels
