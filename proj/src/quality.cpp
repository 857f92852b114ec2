#include <algorithm>
#include <cmath>

#include "twinbench/forge.hpp"
#include "twinbench/replay.hpp"

namespace twinbench {

QualityScore quality_score(const AgentTrack& t, const HDMapModel& m, std::span<const SignalGroup> signals,
                           const VehicleParams& limits, const QualityWeights& w) {
  QualityScore q;
  if (t.samples.empty()) return q;
  const auto& smp = t.samples;

  const int span = smp.back().tick - smp.front().tick + 1;
  bool long_gap = false;
  for (std::size_t i = 1; i < smp.size(); ++i) long_gap = long_gap || smp[i].tick - smp[i - 1].tick > kTickHz;
  q.completeness = long_gap ? 0.0 : static_cast<double>(smp.size()) / static_cast<double>(span);

  std::vector<int> upstream;
  for (const auto& g : signals) upstream.push_back(stop_line_upstream_side(m, g.stop_line, g.group_id, g.controlled_lane_ids));

  std::size_t ok = 0;
  for (std::size_t i = 0; i < smp.size(); ++i) {
    const Vec2 p = smp[i].pose.position();
    bool good = point_in_drivable(m, p) && smp[i].speed <= 1.5 * limits.max_speed;
    if (good && i > 0) {
      const double dt = (smp[i].tick - smp[i - 1].tick) * kTickDt;
      good = std::abs(smp[i].speed - smp[i - 1].speed) / dt <= 1.5 * limits.max_brake;
      for (std::size_t g = 0; good && g < signals.size(); ++g) {
        if (signal_state_at(signals[g], smp[i].tick) != SignalState::red) continue;
        good = !crosses_stop_line(signals[g].stop_line, upstream[g], smp[i - 1].pose.position(), p);
      }
    }
    ok += good ? 1 : 0;
  }
  q.compliance = static_cast<double>(ok) / static_cast<double>(smp.size());
  q.total = w.completeness * q.completeness + w.compliance * q.compliance;
  return q;
}

}  // namespace twinbench
