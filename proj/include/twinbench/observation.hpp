#pragma once

#include <string>
#include <vector>

#include "twinbench/geometry.hpp"
#include "twinbench/scenario.hpp"
#include "twinbench/vehicle.hpp"

namespace twinbench {

struct AgentView {
  std::string track_id;
  AgentCategory category = AgentCategory::car;
  OrientedBox box;
  double speed = 0.0;

  bool operator==(const AgentView&) const = default;
};

struct SignalView {
  std::string group_id;
  SignalState state = SignalState::off;
  Segment stop_line;

  bool operator==(const SignalView&) const = default;
};

/// What a policy sees at one tick: ground-truth agent states stand in for
/// rendered sensor data.
struct Observation {
  int tick = 0;
  EgoState ego;
  Polyline route_remaining;
  std::vector<AgentView> agents;
  std::vector<SignalView> signals;

  bool operator==(const Observation&) const = default;
};

}  // namespace twinbench
