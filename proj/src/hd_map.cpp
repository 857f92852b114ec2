#include "twinbench/hd_map.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "json_util.hpp"

namespace twinbench {

using detail::json;

const Lane* HDMapModel::find_lane(std::string_view id) const {
  for (const auto& lane : lanes) {
    if (lane.lane_id == id) return &lane;
  }
  return nullptr;
}

Bounds HDMapModel::bounds() const {
  Bounds b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  auto grow = [&b](Vec2 p) {
    b.min.x = std::min(b.min.x, p.x);
    b.min.y = std::min(b.min.y, p.y);
    b.max.x = std::max(b.max.x, p.x);
    b.max.y = std::max(b.max.y, p.y);
  };
  for (const auto& l : lanes)
    for (auto p : l.centerline) grow(p);
  for (const auto& poly : drivable_area)
    for (auto p : poly) grow(p);
  for (const auto& poly : crosswalks)
    for (auto p : poly) grow(p);
  for (const auto& s : stop_lines) {
    grow(s.segment.a);
    grow(s.segment.b);
  }
  return b;
}

void check_map(const HDMapModel& m) {
  if (m.map_id.empty()) throw InvariantError("map_id", "must be non-empty");
  std::set<std::string> ids;
  for (const auto& lane : m.lanes) {
    const std::string field = "lanes[" + lane.lane_id + "]";
    if (!ids.insert(lane.lane_id).second) throw InvariantError(field, "duplicate lane_id");
    if (lane.centerline.size() < 2) throw InvariantError(field, "centerline needs >= 2 points");
    for (std::size_t i = 1; i < lane.centerline.size(); ++i) {
      if (distance(lane.centerline[i - 1], lane.centerline[i]) <= kGeomEps)
        throw InvariantError(field, "zero-length centerline segment");
    }
    if (!(lane.width > 0.0)) throw InvariantError(field, "width must be > 0");
  }
  for (std::size_t i = 0; i < m.crosswalks.size(); ++i) {
    if (m.crosswalks[i].size() < 3 || !polygon_is_simple(m.crosswalks[i]))
      throw InvariantError("crosswalks[" + std::to_string(i) + "]", "polygon must be simple with >= 3 vertices");
  }
  for (std::size_t i = 0; i < m.drivable_area.size(); ++i) {
    if (m.drivable_area[i].size() < 3 || !polygon_is_simple(m.drivable_area[i]))
      throw InvariantError("drivable_area[" + std::to_string(i) + "]",
                           "polygon must be simple with >= 3 vertices");
  }
  for (std::size_t i = 0; i < m.stop_lines.size(); ++i) {
    if (m.stop_lines[i].segment.length() <= kGeomEps)
      throw InvariantError("stop_lines[" + std::to_string(i) + "]", "degenerate segment");
  }
}

HDMapModel map_from_json(const json& doc) {
  detail::reject_unknown_keys(doc, {"map_id", "lanes", "crosswalks", "stop_lines", "drivable_area"}, "map");
  HDMapModel m;
  m.map_id = detail::as_string(detail::require(doc, "map_id", "map"), "map.map_id");
  for (const auto& jl : detail::as_array(detail::require(doc, "lanes", "map"), "map.lanes")) {
    detail::reject_unknown_keys(jl, {"lane_id", "centerline", "width", "successor_ids", "signal_group_id"},
                                "map.lanes[]");
    Lane lane;
    lane.lane_id = detail::as_string(detail::require(jl, "lane_id", "lane"), "lane.lane_id");
    lane.centerline = detail::as_points(detail::require(jl, "centerline", "lane"), "lane.centerline");
    lane.width = detail::as_number(detail::require(jl, "width", "lane"), "lane.width");
    if (auto it = jl.find("successor_ids"); it != jl.end()) {
      for (const auto& s : detail::as_array(*it, "lane.successor_ids"))
        lane.successor_ids.push_back(detail::as_string(s, "lane.successor_ids[]"));
    }
    if (auto it = jl.find("signal_group_id"); it != jl.end() && !it->is_null()) {
      lane.signal_group_id = detail::as_string(*it, "lane.signal_group_id");
    }
    m.lanes.push_back(std::move(lane));
  }
  for (const auto& jp : detail::as_array(detail::require(doc, "crosswalks", "map"), "map.crosswalks"))
    m.crosswalks.push_back(detail::as_points(jp, "map.crosswalks[]"));
  for (const auto& js : detail::as_array(detail::require(doc, "stop_lines", "map"), "map.stop_lines")) {
    detail::reject_unknown_keys(js, {"segment", "signal_group_id"}, "map.stop_lines[]");
    const Polyline seg = detail::as_points(detail::require(js, "segment", "stop_line"), "stop_line.segment");
    if (seg.size() != 2) throw ParseError("stop_line.segment: expected two points");
    m.stop_lines.push_back(
        {{seg[0], seg[1]},
         detail::as_string(detail::require(js, "signal_group_id", "stop_line"), "stop_line.signal_group_id")});
  }
  for (const auto& jp : detail::as_array(detail::require(doc, "drivable_area", "map"), "map.drivable_area"))
    m.drivable_area.push_back(detail::as_points(jp, "map.drivable_area[]"));
  check_map(m);
  return m;
}

HDMapModel load_map(std::string_view text) { return map_from_json(detail::parse_json(text, "map")); }

json map_to_json(const HDMapModel& m) {
  json lanes = json::array();
  for (const auto& l : m.lanes) {
    lanes.push_back({{"lane_id", l.lane_id},
                     {"centerline", detail::points_json(l.centerline)},
                     {"width", l.width},
                     {"successor_ids", l.successor_ids},
                     {"signal_group_id", l.signal_group_id ? json(*l.signal_group_id) : json(nullptr)}});
  }
  json crosswalks = json::array();
  for (const auto& c : m.crosswalks) crosswalks.push_back(detail::points_json(c));
  json stops = json::array();
  for (const auto& s : m.stop_lines) {
    stops.push_back({{"segment", detail::points_json({s.segment.a, s.segment.b})},
                     {"signal_group_id", s.signal_group_id}});
  }
  json drivable = json::array();
  for (const auto& d : m.drivable_area) drivable.push_back(detail::points_json(d));
  return {{"map_id", m.map_id},
          {"lanes", lanes},
          {"crosswalks", crosswalks},
          {"stop_lines", stops},
          {"drivable_area", drivable}};
}

std::string serialize_map(const HDMapModel& m) { return map_to_json(m).dump(1) + "\n"; }

bool point_in_drivable(const HDMapModel& m, Vec2 p) {
  return std::any_of(m.drivable_area.begin(), m.drivable_area.end(),
                     [p](const Polygon& poly) { return point_in_polygon(poly, p); });
}

Polygon intersection_region(const HDMapModel& m) {
  std::vector<Vec2> pts;
  for (const auto& s : m.stop_lines) {
    pts.push_back(s.segment.a);
    pts.push_back(s.segment.b);
  }
  return convex_hull(std::move(pts));
}

double lane_clearance(const HDMapModel& m, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& lane : m.lanes) {
    const auto proj = project_onto_polyline(lane.centerline, p);
    best = std::min(best, proj.distance - 0.5 * lane.width);
  }
  return best;
}

HDMapModel transform_map(const HDMapModel& m, const RigidTransform& tf) {
  HDMapModel out = m;
  for (auto& l : out.lanes) l.centerline = tf.apply(l.centerline);
  for (auto& c : out.crosswalks) c = tf.apply(c);
  for (auto& s : out.stop_lines) s.segment = tf.apply(s.segment);
  for (auto& d : out.drivable_area) d = tf.apply(d);
  return out;
}

int stop_line_upstream_side(const HDMapModel& m, const Segment& stop_line, std::string_view group_id,
                            std::span<const std::string> controlled_lane_ids) {
  auto side_of = [&](const Lane& lane) { return signed_side(stop_line, lane.centerline.front()); };
  for (const auto& id : controlled_lane_ids) {
    if (const Lane* lane = m.find_lane(id)) {
      if (int s = side_of(*lane); s != 0) return s;
    }
  }
  for (const auto& lane : m.lanes) {
    if (lane.signal_group_id && *lane.signal_group_id == group_id) {
      if (int s = side_of(lane); s != 0) return s;
    }
  }
  return 0;
}

bool crosses_stop_line(const Segment& stop_line, int upstream, Vec2 prev, Vec2 curr) {
  if (distance(prev, curr) <= kGeomEps) return false;
  const int before = signed_side(stop_line, prev);
  const int after = signed_side(stop_line, curr);
  if (before == after || before == 0) return false;
  if (upstream != 0 && before != upstream) return false;
  return segments_intersect({prev, curr}, stop_line);
}

}  // namespace twinbench
