#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "twinbench/config.hpp"
#include "twinbench/hd_map.hpp"
#include "twinbench/metrics.hpp"
#include "twinbench/observation.hpp"
#include "twinbench/scenario.hpp"

namespace twinbench {

/// Everything the rules look at for one tick.
struct TickState {
  int tick = 0;
  OrientedBox ego_box;
  std::optional<Vec2> prev_center;
  std::span<const AgentView> agents;  ///< every agent alive this tick
  std::span<const SignalView> signals;
  double route_offset = 0.0;          ///< signed lateral offset to the route
};

/// Stateful per-episode infraction detector. The history it keeps is the
/// off-road dwell counter, the deviation state and the raised kinds.
class InfractionMonitor {
 public:
  InfractionMonitor(const HDMapModel& map, const Scenario& scenario, const EvalConfig& cfg);

  /// Raises the infractions triggered at this tick and returns them.
  std::vector<Infraction> detect(const TickState& state);

  const std::vector<Infraction>& infractions() const { return raised_; }
  bool terminal() const;

 private:
  void raise(InfractionKind kind, int tick, bool terminal, std::vector<Infraction>& out);

  const HDMapModel& map_;
  const EvalConfig& cfg_;
  std::vector<int> upstream_;  ///< per scenario signal group
  std::vector<std::string> group_ids_;
  int off_road_ticks_ = 0;
  bool deviating_ = false;
  std::set<InfractionKind> seen_;
  std::vector<Infraction> raised_;
};

InfractionKind collision_kind_for(AgentCategory c);

}  // namespace twinbench
