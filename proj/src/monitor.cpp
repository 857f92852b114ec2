#include "twinbench/monitor.hpp"

#include <algorithm>
#include <cmath>

namespace twinbench {

InfractionKind collision_kind_for(AgentCategory c) {
  // Two-wheelers and tricycles share the vehicle coefficient.
  return c == AgentCategory::pedestrian ? InfractionKind::collision_pedestrian : InfractionKind::collision_vehicle;
}

InfractionMonitor::InfractionMonitor(const HDMapModel& map, const Scenario& scenario, const EvalConfig& cfg)
    : map_(map), cfg_(cfg) {
  for (const auto& g : scenario.signals) {
    group_ids_.push_back(g.group_id);
    upstream_.push_back(stop_line_upstream_side(map, g.stop_line, g.group_id, g.controlled_lane_ids));
  }
}

bool InfractionMonitor::terminal() const {
  return std::any_of(raised_.begin(), raised_.end(), [](const Infraction& i) { return i.terminal; });
}

void InfractionMonitor::raise(InfractionKind kind, int tick, bool terminal, std::vector<Infraction>& out) {
  if (cfg_.dedup_infractions && !seen_.insert(kind).second) return;
  const Infraction inf{kind, tick, cfg_.penalties[kind], terminal};
  raised_.push_back(inf);
  out.push_back(inf);
}

std::vector<Infraction> InfractionMonitor::detect(const TickState& st) {
  std::vector<Infraction> out;

  for (const auto& agent : st.agents) {
    if (obb_intersects(st.ego_box, agent.box)) raise(collision_kind_for(agent.category), st.tick, true, out);
  }

  if (point_in_drivable(map_, st.ego_box.center)) {
    off_road_ticks_ = 0;
  } else {
    ++off_road_ticks_;
    const int grace_ticks = static_cast<int>(std::lround(cfg_.off_road_grace_s * kTickHz));
    if (off_road_ticks_ == grace_ticks + 1) raise(InfractionKind::off_road, st.tick, true, out);
  }

  if (st.prev_center) {
    for (const auto& sig : st.signals) {
      if (sig.state != SignalState::red) continue;
      auto it = std::find(group_ids_.begin(), group_ids_.end(), sig.group_id);
      const int up = it == group_ids_.end() ? 0 : upstream_[static_cast<std::size_t>(it - group_ids_.begin())];
      if (crosses_stop_line(sig.stop_line, up, *st.prev_center, st.ego_box.center))
        raise(InfractionKind::red_light, st.tick, false, out);
    }
  }

  const bool deviating = std::abs(st.route_offset) > cfg_.route_deviation_m;
  if (deviating && !deviating_) raise(InfractionKind::route_deviation, st.tick, false, out);
  deviating_ = deviating;

  return out;
}

}  // namespace twinbench
