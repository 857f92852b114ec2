#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "twinbench/geometry.hpp"

namespace twinbench {

struct Lane {
  std::string lane_id;
  Polyline centerline;
  double width = 3.5;
  std::vector<std::string> successor_ids;
  std::optional<std::string> signal_group_id;
};

struct StopLine {
  Segment segment;
  std::string signal_group_id;
};

struct Bounds {
  Vec2 min;
  Vec2 max;

  bool contains(Vec2 p, double margin = 0.0) const {
    return p.x >= min.x - margin && p.x <= max.x + margin && p.y >= min.y - margin &&
           p.y <= max.y + margin;
  }
};

/// Vectorized map in a per-intersection local planar frame (meters).
struct HDMapModel {
  std::string map_id;
  std::vector<Lane> lanes;
  std::vector<Polygon> crosswalks;
  std::vector<StopLine> stop_lines;
  /// Union of simple polygons.
  std::vector<Polygon> drivable_area;

  const Lane* find_lane(std::string_view id) const;
  Bounds bounds() const;
};

/// Throws InvariantError on the first broken invariant.
void check_map(const HDMapModel& m);

HDMapModel load_map(std::string_view text);
HDMapModel map_from_json(const nlohmann::json& doc);
nlohmann::json map_to_json(const HDMapModel& m);
std::string serialize_map(const HDMapModel& m);

bool point_in_drivable(const HDMapModel& m, Vec2 p);

/// Junction region: convex hull of every stop-line endpoint.
Polygon intersection_region(const HDMapModel& m);

/// Smallest (distance to centerline - half width) over all lanes; <= 0 means
/// the point lies within some lane.
double lane_clearance(const HDMapModel& m, Vec2 p);

HDMapModel transform_map(const HDMapModel& m, const RigidTransform& tf);

/// Side (+1/-1) of the stop line that controlled traffic approaches from,
/// taken from the controlled lanes' centerlines; 0 when unknown.
int stop_line_upstream_side(const HDMapModel& m, const Segment& stop_line, std::string_view group_id,
                            std::span<const std::string> controlled_lane_ids);

/// True when the move prev->curr crosses the stop-line segment leaving the
/// upstream side. With upstream == 0 any crossing counts.
bool crosses_stop_line(const Segment& stop_line, int upstream, Vec2 prev, Vec2 curr);

}  // namespace twinbench
