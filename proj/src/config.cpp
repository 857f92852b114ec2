#include "twinbench/config.hpp"

#include "json_util.hpp"

namespace twinbench {

using detail::json;

json config_to_json(const EvalConfig& c) {
  return {{"vehicle", vehicle_to_json(c.vehicle)},
          {"tracking", tracking_to_json(c.tracking)},
          {"penalties", c.penalties.to_json()},
          {"timeout_factor", c.timeout_factor},
          {"timeout_min_s", c.timeout_min_s},
          {"sensing_range", c.sensing_range},
          {"policy_timeout_s", c.policy_timeout_s},
          {"rc_success_threshold", c.rc_success_threshold},
          {"destination_radius", c.destination_radius},
          {"route_deviation_m", c.route_deviation_m},
          {"off_road_grace_s", c.off_road_grace_s},
          {"dedup_infractions", c.dedup_infractions},
          {"l2_anchor_stride", c.l2_anchor_stride}};
}

EvalConfig config_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"vehicle", "tracking", "penalties", "timeout_factor", "timeout_min_s", "sensing_range",
                               "policy_timeout_s", "rc_success_threshold", "destination_radius", "route_deviation_m",
                               "off_road_grace_s", "dedup_infractions", "l2_anchor_stride"},
                              "config");
  EvalConfig c;
  if (auto it = j.find("vehicle"); it != j.end()) c.vehicle = vehicle_from_json(*it);
  if (auto it = j.find("tracking"); it != j.end()) c.tracking = tracking_from_json(*it);
  if (auto it = j.find("penalties"); it != j.end()) c.penalties = PenaltyTable::from_json(*it);
  auto num = [&j](const char* k, double& out) {
    if (auto it = j.find(k); it != j.end()) out = detail::as_number(*it, std::string("config.") + k);
  };
  num("timeout_factor", c.timeout_factor);
  num("timeout_min_s", c.timeout_min_s);
  num("sensing_range", c.sensing_range);
  num("policy_timeout_s", c.policy_timeout_s);
  num("rc_success_threshold", c.rc_success_threshold);
  num("destination_radius", c.destination_radius);
  num("route_deviation_m", c.route_deviation_m);
  num("off_road_grace_s", c.off_road_grace_s);
  if (auto it = j.find("dedup_infractions"); it != j.end()) {
    if (!it->is_boolean()) throw ParseError("config.dedup_infractions: expected boolean");
    c.dedup_infractions = it->get<bool>();
  }
  if (auto it = j.find("l2_anchor_stride"); it != j.end())
    c.l2_anchor_stride = static_cast<int>(detail::as_integer(*it, "config.l2_anchor_stride"));
  if (c.timeout_factor <= 0 || c.sensing_range <= 0 || c.policy_timeout_s <= 0 || c.l2_anchor_stride < 1)
    throw InvariantError("config", "timeouts, range and stride must be positive");
  return c;
}

EvalConfig load_config(std::string_view text) { return config_from_json(detail::parse_json(text, "config")); }

}  // namespace twinbench
