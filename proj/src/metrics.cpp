#include "t4reg/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "t4reg/errors.hpp"

namespace t4reg {

namespace {

void check(std::span<const double> t, std::span<const double> z) {
  if (z.empty()) throw EmptyList("metric over an empty sample sequence");
  if (t.size() != z.size()) throw ConfigError("metric: time and sample sequences differ in length");
}

std::optional<double> first_at_or_above(std::span<const double> t, std::span<const double> z, double level) {
  for (std::size_t k = 0; k < z.size(); ++k)
    if (z[k] >= level) return t[k];
  return std::nullopt;
}

bool in_band(double z, double target, double band) { return std::abs(z - target) <= band * target; }

template <class F>
std::optional<double> opt(F&& f) {
  try {
    return f();
  } catch (const NotReached&) {
    return std::nullopt;
  } catch (const NotSettled&) {
    return std::nullopt;
  }
}

}  // namespace

double rise_time(std::span<const double> t, std::span<const double> z, double target) {
  check(t, z);
  const auto t90 = first_at_or_above(t, z, 0.9 * target);
  if (!t90) throw NotReached("output never reaches 90% of the target");
  const auto t10 = first_at_or_above(t, z, 0.1 * target);
  return *t90 - *t10;
}

double overshoot_pct(std::span<const double> z, double target) {
  if (z.empty()) throw EmptyList("overshoot of an empty sample sequence");
  const double zmax = *std::max_element(z.begin(), z.end());
  return 100.0 * std::max(0.0, zmax - target) / target;
}

double settling_time(std::span<const double> t, std::span<const double> z, double target, double band) {
  check(t, z);
  std::size_t k = z.size();
  while (k > 0 && in_band(z[k - 1], target, band)) --k;
  if (k == z.size()) throw NotSettled("last sample lies outside the band");
  return t[k];
}

double iae(std::span<const double> z, double target, double Ts) {
  double acc = 0.0;
  for (double v : z) acc += std::abs(v - target) * Ts;
  return acc;
}

double time_in_band_pct(std::span<const double> z, double target, double rel_band) {
  if (z.empty()) throw EmptyList("time in band of an empty sample sequence");
  const auto n = std::count_if(z.begin(), z.end(), [&](double v) { return in_band(v, target, rel_band); });
  return 100.0 * static_cast<double>(n) / static_cast<double>(z.size());
}

double band_entry_time(std::span<const double> t, std::span<const double> z, double target, double band) {
  check(t, z);
  for (std::size_t k = 0; k < z.size(); ++k)
    if (in_band(z[k], target, band)) return t[k];
  throw NotReached("output never enters the band");
}

RunMetrics compute_metrics(std::span<const double> t, std::span<const double> z, double target, double Ts) {
  check(t, z);
  RunMetrics m;
  m.rise_time = opt([&] { return rise_time(t, z, target); });
  m.peak = *std::max_element(z.begin(), z.end());
  m.overshoot_pct = overshoot_pct(z, target);
  m.final_error = z.back() - target;
  m.iae = iae(z, target, Ts);
  for (std::size_t b = 0; b < kBands.size(); ++b) {
    m.settling_time[b] = opt([&] { return settling_time(t, z, target, kBands[b]); });
    m.time_in_band_pct[b] = time_in_band_pct(z, target, kBands[b]);
    m.band_entry_time[b] = opt([&] { return band_entry_time(t, z, target, kBands[b]); });
  }
  return m;
}

}  // namespace t4reg
