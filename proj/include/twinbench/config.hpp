#pragma once

#include <string_view>

#include "json.hpp"
#include "twinbench/metrics.hpp"
#include "twinbench/vehicle.hpp"

namespace twinbench {

/// Everything an episode run depends on besides scenario, map, policy and seed.
struct EvalConfig {
  VehicleParams vehicle;
  TrackingParams tracking;
  PenaltyTable penalties;
  double timeout_factor = 2.0;      ///< multiple of the recorded expert duration
  double timeout_min_s = 20.0;
  double sensing_range = 85.0;
  double policy_timeout_s = 10.0;   ///< per-tick wall-clock limit for bridge policies
  double rc_success_threshold = 0.95;
  double destination_radius = 2.0;
  double route_deviation_m = 8.0;
  double off_road_grace_s = 0.5;
  bool dedup_infractions = true;    ///< one infraction per kind per episode
  int l2_anchor_stride = 1;         ///< ticks between open-loop anchors
};

nlohmann::json config_to_json(const EvalConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
EvalConfig config_from_json(const nlohmann::json& j);
EvalConfig load_config(std::string_view text);

}  // namespace twinbench
