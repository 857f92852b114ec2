#pragma once

#include <span>

#include "twinbench/metrics.hpp"
#include "twinbench/policy.hpp"
#include "twinbench/scenario.hpp"

namespace twinbench {

/// Open-loop displacement error of a waypoint predictor against the recorded
/// ego track. Anchors run from the second recorded tick to the last tick that
/// still has two seconds of future, every `stride` ticks; the predictor sees
/// the recorded ego state at each anchor in order. Throws ArgumentError when
/// the track is too short or the predictor emits control commands.
L2Report open_loop_l2(Policy& predictor, const Scenario& s, int stride = 1);

/// Mean of per-scenario reports (each scenario weighs the same).
L2Report mean_l2(std::span<const L2Report> reports);

}  // namespace twinbench
