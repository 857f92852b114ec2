#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "twinbench/config.hpp"
#include "twinbench/hd_map.hpp"
#include "twinbench/metrics.hpp"
#include "twinbench/observation.hpp"
#include "twinbench/policy.hpp"
#include "twinbench/scenario.hpp"

namespace twinbench {

/// Latest schedule entry at or before `tick`. Throws ArgumentError before the
/// first entry.
SignalState signal_state_at(const SignalGroup& g, int tick);

/// Agent and signal views for one world tick. Agents beyond `sensing_range`
/// of the ego center and the ego track itself are left out.
Observation build_observation(const Scenario& s, int world_tick, const EgoState& ego, const Polyline& route_remaining,
                              double sensing_range);

/// Route geometry beyond arc length `s`.
Polyline route_after(std::span<const Vec2> route, double s);

struct TickRecord {
  int tick = 0;
  EgoState state;
  ControlCommand command;
  double route_s = 0.0;  ///< progress along the route, never decreasing

  bool operator==(const TickRecord&) const = default;
};

struct EpisodeTrace {
  std::vector<TickRecord> ticks;
  Termination termination = Termination::timeout;
  double wall_time_s = 0.0;

  std::vector<Vec2> positions() const;
};

/// Completion fraction recorded in a trace.
double route_completion(const EpisodeTrace& trace, std::span<const Vec2> route);

/// Episode tick budget: timeout factor times the recorded ego duration, with a floor.
int episode_tick_limit(const Scenario& s, const EvalConfig& cfg);

/// Lockstep closed-loop episode. Policy failures end the episode and are
/// reported in the result; they never escape as exceptions.
std::pair<EpisodeResult, EpisodeTrace> run_episode(const Scenario& s, const HDMapModel& m, Policy& policy,
                                                   const EvalConfig& cfg, std::uint64_t seed);

}  // namespace twinbench
