#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "t4reg/errors.hpp"
#include "t4reg/metrics.hpp"

using namespace t4reg;

namespace {

struct Series {
  std::vector<double> t, z;
};

Series ramp(double target, double hours, int n) {
  Series s;
  for (int k = 0; k <= n; ++k) {
    s.t.push_back(hours * k / n);
    s.z.push_back(target * k / n);
  }
  return s;
}

}  // namespace

TEST_CASE("rise time") {
  const Series r = ramp(25.0, 100.0, 1000);
  CHECK(rise_time(r.t, r.z, 25.0) == doctest::Approx(80.0).epsilon(1e-12));

  const std::vector<double> t{0, 1, 2}, above{30, 30, 30};
  CHECK(rise_time(t, above, 25.0) == 0.0);

  const std::vector<double> low{1, 2, 3};
  CHECK_THROWS_AS(rise_time(t, low, 25.0), NotReached);
}

TEST_CASE("overshoot") {
  CHECK(overshoot_pct(std::vector<double>{10, 24.973, 24}, 25.0) == 0.0);
  CHECK(overshoot_pct(std::vector<double>{5, 20.594, 20.1}, 20.0) == doctest::Approx(2.97).epsilon(1e-9));
  CHECK_THROWS_AS(overshoot_pct(std::vector<double>{}, 20.0), EmptyList);
}

TEST_CASE("settling time") {
  const std::vector<double> t{0, 1, 2, 3, 4, 5};
  // enters, leaves, re-enters for good at t=4
  const std::vector<double> z{10, 24.5, 27.0, 26.5, 25.5, 24.9};
  CHECK(settling_time(t, z, 25.0, 0.05) == 4.0);
  CHECK(settling_time(t, z, 25.0, 0.10) == 1.0);
  const std::vector<double> out{10, 24.5, 25, 25, 25, 30};
  CHECK_THROWS_AS(settling_time(t, out, 25.0), NotSettled);
  const std::vector<double> always(6, 25.0);
  CHECK(settling_time(t, always, 25.0) == 0.0);
}

TEST_CASE("band entry") {
  const std::vector<double> t{0, 1, 2, 3};
  const std::vector<double> z{0, 17.6, 23.9, 40};
  CHECK(band_entry_time(t, z, 25.0, 0.30) == 1.0);
  CHECK(band_entry_time(t, z, 25.0, 0.05) == 2.0);
  CHECK_THROWS_AS(band_entry_time(t, std::vector<double>{0, 0, 0, 0}, 25.0), NotReached);
}

TEST_CASE("iae") {
  CHECK(iae(std::vector<double>(10, 25.0), 25.0, 2.0) == 0.0);
  CHECK(iae(std::vector<double>{24, 27, 25}, 25.0, 0.5) == doctest::Approx(1.5));
  // rectangle and trapezoid agree to O(Ts) on a smooth error
  std::vector<double> z;
  const double Ts = 0.01;
  for (int k = 0; k <= 1000; ++k) z.push_back(25.0 + 3.0 * std::exp(-k * Ts));
  double trap = 0.0;
  for (std::size_t k = 1; k < z.size(); ++k) trap += 0.5 * Ts * (std::abs(z[k] - 25.0) + std::abs(z[k - 1] - 25.0));
  CHECK(std::abs(iae(z, 25.0, Ts) - trap) <= 3.0 * Ts);
}

TEST_CASE("time in band") {
  const std::vector<double> z{25, 26, 30, 10};
  CHECK(time_in_band_pct(z, 25.0, 0.05) == 50.0);
  CHECK(time_in_band_pct(z, 25.0, 0.30) == 75.0);
  CHECK_THROWS_AS(time_in_band_pct(std::vector<double>{}, 25.0, 0.05), EmptyList);
}

TEST_CASE("metric invariants on random traces") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> U(0.0, 50.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> t, z;
    for (int k = 0; k < 50; ++k) {
      t.push_back(0.5 * k);
      z.push_back(U(gen));
    }
    const RunMetrics m = compute_metrics(t, z, 25.0, 0.5);
    CHECK(m.overshoot_pct >= 0.0);
    CHECK(m.iae >= 0.0);
    CHECK(m.final_error == z.back() - 25.0);
    for (int b = 0; b < 3; ++b) {
      CHECK(m.time_in_band_pct[b] >= 0.0);
      CHECK(m.time_in_band_pct[b] <= 100.0);
      if (b > 0) CHECK(m.time_in_band_pct[b] >= m.time_in_band_pct[b - 1]);
      if (m.settling_time[b] && m.band_entry_time[b]) CHECK(*m.settling_time[b] >= *m.band_entry_time[b]);
      if (m.settling_time[b]) CHECK(m.band_entry_time[b].has_value());
    }
  }
}

TEST_CASE("metric input errors") {
  const std::vector<double> t{0, 1}, z{1};
  CHECK_THROWS_AS(compute_metrics(t, z, 25.0, 1.0), ConfigError);
  CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, std::vector<double>{}, 25.0, 1.0), EmptyList);
}
