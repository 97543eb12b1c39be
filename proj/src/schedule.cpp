#include "t4reg/schedule.hpp"

#include <algorithm>

namespace t4reg {

std::vector<Segment> EfSchedule::segments() const {
  std::vector<Segment> out;
  const double ts_s = Ts * 60.0;
  double cursor = 0.0;
  auto push = [&](double b, double e, double lv) {
    b = std::clamp(b, 0.0, ts_s);
    e = std::clamp(e, 0.0, ts_s);
    if (e <= b) return;
    if (b > cursor) out.push_back({cursor / 60.0, b / 60.0, 0.0});
    out.push_back({b / 60.0, e / 60.0, lv});
    cursor = e;
  };
  if (level != 0.0) {
    for (int j = 0; j < n_bursts; ++j) {
      const double b = j * burst_period_s + shift_s;
      if (b >= ts_s) break;
      push(b, b + burst_on_s, level);
    }
  }
  if (cursor < ts_s) out.push_back({cursor / 60.0, Ts, 0.0});
  return out;
}

double EfSchedule::on_time() const {
  double total = 0.0;
  for (const auto& seg : segments())
    if (seg.level != 0.0) total += seg.end - seg.begin;
  return total;
}

}  // namespace t4reg
