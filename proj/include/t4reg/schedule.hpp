#pragma once

#include <vector>

namespace t4reg {

// One constant-level piece of an effective EF signal, times in minutes
// relative to the window start.
struct Segment {
  double begin = 0.0;
  double end = 0.0;
  double level = 0.0;
};

// Piecewise-constant burst-averaged EF over one control window.
//
// The window carries n_bursts identical bursts of length burst_on_s repeating
// every burst_period_s, optionally delayed by shift_s (negative shifts drop the
// head). Timing fields are seconds, the window itself is in minutes.
struct EfSchedule {
  double t_start = 0.0;  // min
  double Ts = 0.0;       // min
  double level = 0.0;    // on-level, a.u.
  double burst_period_s = 1.0;
  double burst_on_s = 0.0;
  int n_bursts = 0;
  double shift_s = 0.0;

  // Level at offset s (minutes) from t_start.
  double level_at(double s) const {
    if (level == 0.0 || n_bursts <= 0 || s < 0.0 || s >= Ts) return 0.0;
    const double x = s * 60.0 - shift_s;
    if (x < 0.0) return 0.0;
    const double j = static_cast<double>(static_cast<long long>(x / burst_period_s));
    if (j >= n_bursts) return 0.0;
    return (x - j * burst_period_s < burst_on_s) ? level : 0.0;
  }

  // Materialized breakpoints, truncated to [0, Ts). Zero-level gaps are explicit.
  std::vector<Segment> segments() const;

  // Total on-time inside the window (minutes).
  double on_time() const;

  // Exact windowed mean of the signal.
  double mean() const { return Ts > 0.0 ? level * on_time() / Ts : 0.0; }
};

}  // namespace t4reg
