#pragma once

#include <vector>

#include "t4reg/apid.hpp"

// Batched rollout kernels. Each rollout owns its state copy, so the parallel
// path returns exactly the values of the serial reference path in the same
// order, whatever the thread count.
namespace t4reg::kernels {

enum class Exec { serial, parallel };

// Default used by the controllers; parallel when built with OpenMP.
Exec default_exec();
void set_default_exec(Exec e);
int max_threads();

std::vector<double> window_costs(const std::vector<PidGains>& probes, const WindowSnapshot& snap,
                                 const ControllerConfig& cfg, const Scenario& sc, Exec exec);

// Row-major probes x scenarios: out[p * scenarios.size() + s].
std::vector<double> scenario_costs(const std::vector<PidGains>& probes, const std::vector<Scenario>& scenarios,
                                   const WindowSnapshot& snap, const ControllerConfig& cfg, Exec exec);

}  // namespace t4reg::kernels
