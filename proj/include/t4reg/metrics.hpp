#pragma once

#include <array>
#include <optional>
#include <span>

namespace t4reg {

// Metrics over a sampled output sequence. Times are in hours.

double rise_time(std::span<const double> t, std::span<const double> z, double target);
double overshoot_pct(std::span<const double> z, double target);
double settling_time(std::span<const double> t, std::span<const double> z, double target, double band = 0.05);
// Rectangle rule: sum |e_k| * Ts.
double iae(std::span<const double> z, double target, double Ts);
double time_in_band_pct(std::span<const double> z, double target, double rel_band);
// First sample time inside the band.
double band_entry_time(std::span<const double> t, std::span<const double> z, double target, double band = 0.05);

inline constexpr std::array<double, 3> kBands{0.05, 0.10, 0.30};

struct RunMetrics {
  std::optional<double> rise_time;
  double peak = 0.0;
  double overshoot_pct = 0.0;
  std::array<std::optional<double>, 3> settling_time;  // per kBands
  double final_error = 0.0;  // last sample minus target
  double iae = 0.0;
  std::array<double, 3> time_in_band_pct{};
  std::array<std::optional<double>, 3> band_entry_time;
};

RunMetrics compute_metrics(std::span<const double> t, std::span<const double> z, double target, double Ts);

}  // namespace t4reg
