#include "twinbench/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"

namespace twinbench {

using detail::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw ParseError(std::string(what) + ": unknown value '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 8> kCategoryNames = {"car",        "truck",    "bus",     "van",
                                                            "motorcycle", "tricycle", "cyclist", "pedestrian"};
constexpr std::array<std::string_view, 4> kSignalNames = {"red", "yellow", "green", "off"};
constexpr std::array<std::string_view, 6> kWeatherNames = {"sunny", "cloudy", "overcast", "rain", "fog", "snow"};
constexpr std::array<std::string_view, 5> kTimeNames = {"morning", "noon", "afternoon", "evening", "night"};
constexpr std::array<std::string_view, 8> kMainNames = {"IPC", "COV", "YLW", "UT", "STP", "STR", "LFT", "RT"};
constexpr std::array<std::string_view, 14> kSubNames = {"COV-LFT", "COV-RT", "COV-STR", "IPC-LFT", "IPC-RT",
                                                        "IPC-STR", "YLW-LFT", "YLW-STR", "UT-N",    "UT-AN",
                                                        "LFT",     "RT",      "STR",     "STP"};

}  // namespace

std::string_view to_string(AgentCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }
AgentCategory parse_category(std::string_view s) { return parse_enum<AgentCategory>(s, kCategoryNames, "category"); }

bool is_vehicle(AgentCategory c) {
  return c == AgentCategory::car || c == AgentCategory::truck || c == AgentCategory::bus || c == AgentCategory::van;
}

std::pair<double, double> default_dimensions(AgentCategory c) {
  switch (c) {
    case AgentCategory::car: return {4.6, 1.9};
    case AgentCategory::truck: return {8.0, 2.5};
    case AgentCategory::bus: return {12.0, 2.5};
    case AgentCategory::van: return {5.2, 2.0};
    case AgentCategory::motorcycle: return {2.2, 0.8};
    case AgentCategory::tricycle: return {2.6, 1.2};
    case AgentCategory::cyclist: return {1.8, 0.6};
    case AgentCategory::pedestrian: return {0.6, 0.6};
  }
  return {1.0, 1.0};
}

std::string_view to_string(SignalState s) { return kSignalNames[static_cast<std::size_t>(s)]; }
SignalState parse_signal_state(std::string_view s) { return parse_enum<SignalState>(s, kSignalNames, "signal state"); }
std::string_view to_string(Weather w) { return kWeatherNames[static_cast<std::size_t>(w)]; }
Weather parse_weather(std::string_view s) { return parse_enum<Weather>(s, kWeatherNames, "weather"); }
std::string_view to_string(TimeOfDay t) { return kTimeNames[static_cast<std::size_t>(t)]; }
TimeOfDay parse_time_of_day(std::string_view s) { return parse_enum<TimeOfDay>(s, kTimeNames, "time_of_day"); }
std::string_view to_string(MainBehavior b) { return kMainNames[static_cast<std::size_t>(b)]; }
std::string_view to_string(SubBehavior b) { return kSubNames[static_cast<std::size_t>(b)]; }
MainBehavior parse_main_behavior(std::string_view s) { return parse_enum<MainBehavior>(s, kMainNames, "behavior.main"); }
SubBehavior parse_sub_behavior(std::string_view s) { return parse_enum<SubBehavior>(s, kSubNames, "behavior.sub"); }

MainBehavior main_of(SubBehavior sub) {
  switch (sub) {
    case SubBehavior::COV_LFT:
    case SubBehavior::COV_RT:
    case SubBehavior::COV_STR: return MainBehavior::COV;
    case SubBehavior::IPC_LFT:
    case SubBehavior::IPC_RT:
    case SubBehavior::IPC_STR: return MainBehavior::IPC;
    case SubBehavior::YLW_LFT:
    case SubBehavior::YLW_STR: return MainBehavior::YLW;
    case SubBehavior::UT_N:
    case SubBehavior::UT_AN: return MainBehavior::UT;
    case SubBehavior::LFT: return MainBehavior::LFT;
    case SubBehavior::RT: return MainBehavior::RT;
    case SubBehavior::STR: return MainBehavior::STR;
    case SubBehavior::STP: return MainBehavior::STP;
  }
  return MainBehavior::STR;
}

Polyline AgentTrack::path() const {
  Polyline out;
  for (const auto& s : samples) {
    const Vec2 p = s.pose.position();
    if (out.empty() || distance(out.back(), p) > kGeomEps) out.push_back(p);
  }
  return out;
}

const AgentTrack* Scenario::find_track(std::string_view id) const {
  for (const auto& t : tracks) {
    if (t.track_id == id) return &t;
  }
  return nullptr;
}

const AgentTrack& Scenario::ego_track() const {
  const AgentTrack* t = find_track(ego.agent_id);
  if (t == nullptr) throw InvariantError("ego.agent_id", "no track with id '" + ego.agent_id + "'");
  return *t;
}

namespace {

bool heading_ok(double h) { return std::isfinite(h) && h > -kPi && h <= kPi; }

double distance_to_path(const Polyline& path, Vec2 p) {
  if (path.size() == 1) return distance(path.front(), p);
  return project_onto_polyline(path, p).distance;
}

}  // namespace

void check_scenario(const Scenario& s) {
  if (s.scenario_id.empty()) throw InvariantError("scenario_id", "must be non-empty");
  if (s.tick_hz != kTickHz) throw InvariantError("tick_hz", "must be exactly 10");
  if (s.n_ticks <= 0) throw InvariantError("n_ticks", "must be positive");
  if (s.behavior && main_of(s.behavior->sub) != s.behavior->main)
    throw InvariantError("behavior", "sub label inconsistent with main label");

  std::set<std::string> ids;
  for (const auto& t : s.tracks) {
    const std::string field = "tracks[" + t.track_id + "]";
    if (t.track_id.empty()) throw InvariantError("tracks[]", "empty track_id");
    if (!ids.insert(t.track_id).second) throw InvariantError(field, "duplicate track_id");
    if (!(t.length > 0.0) || !(t.width > 0.0)) throw InvariantError(field, "length and width must be > 0");
    if (t.samples.empty()) throw InvariantError(field, "samples must be non-empty");
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      const auto& smp = t.samples[i];
      if (smp.tick < 0 || smp.tick >= s.n_ticks) throw InvariantError(field, "tick outside [0, n_ticks)");
      if (!std::isfinite(smp.pose.x) || !std::isfinite(smp.pose.y)) throw InvariantError(field, "non-finite position");
      if (!heading_ok(smp.pose.heading)) throw InvariantError(field, "heading outside (-pi, pi]");
      if (!std::isfinite(smp.speed) || smp.speed < 0.0) throw InvariantError(field, "speed must be >= 0");
      if (i == 0) continue;
      const auto& prev = t.samples[i - 1];
      if (smp.tick <= prev.tick) throw InvariantError(field, "ticks must be strictly increasing");
      const double dt = (smp.tick - prev.tick) * kTickDt;
      const double disp = distance(prev.pose.position(), smp.pose.position());
      const double vmax = std::max(prev.speed, smp.speed);
      const double vmin = std::min(prev.speed, smp.speed);
      if (disp > 3.0 * vmax * dt + 0.1 || disp < vmin * dt / 3.0 - 0.1)
        throw InvariantError(field, "displacement inconsistent with speed at tick " + std::to_string(smp.tick));
    }
  }

  for (const auto& g : s.signals) {
    const std::string field = "signals[" + g.group_id + "]";
    if (g.stop_line.length() <= kGeomEps) throw InvariantError(field, "degenerate stop line");
    if (g.schedule.empty() || g.schedule.front().first != 0)
      throw InvariantError(field, "schedule must start at tick 0");
    for (std::size_t i = 1; i < g.schedule.size(); ++i) {
      if (g.schedule[i].first <= g.schedule[i - 1].first)
        throw InvariantError(field, "schedule ticks must be strictly increasing");
    }
  }

  const AgentTrack* ego = s.find_track(s.ego.agent_id);
  if (ego == nullptr) throw InvariantError("EgoAssignment", "agent_id '" + s.ego.agent_id + "' not among tracks");
  const Polyline path = ego->path();
  if (distance_to_path(path, s.ego.source.position()) > 1.0)
    throw InvariantError("EgoAssignment.source", "not on the ego track within 1 m");
  if (distance_to_path(path, s.ego.destination.position()) > 1.0)
    throw InvariantError("EgoAssignment.destination", "not on the ego track within 1 m");
  const auto& wps = s.ego.route_waypoints;
  if (wps.size() < 2) throw InvariantError("EgoAssignment.route_waypoints", "needs >= 2 points");
  for (std::size_t i = 1; i < wps.size(); ++i) {
    const double gap = distance(wps[i - 1], wps[i]);
    if (gap < 1.0 - 1e-6 || gap > 10.0 + 1e-6)
      throw InvariantError("EgoAssignment.route_waypoints", "spacing outside [1 m, 10 m]");
  }
}

namespace {

Pose2 pose_from_json(const json& v, std::string_view ctx) {
  if (!v.is_array() || v.size() != 3) throw ParseError(std::string(ctx) + ": expected [x, y, heading]");
  return {detail::as_number(v[0], ctx), detail::as_number(v[1], ctx), detail::as_number(v[2], ctx)};
}

json pose_json(const Pose2& p) { return json::array({p.x, p.y, p.heading}); }

}  // namespace

json behavior_to_json(const BehaviorLabel& b) {
  return {{"main", std::string(to_string(b.main))}, {"sub", std::string(to_string(b.sub))}};
}

Scenario scenario_from_json(const json& doc) {
  detail::reject_unknown_keys(doc,
                              {"scenario_id", "intersection_id", "tick_hz", "n_ticks", "weather", "time_of_day",
                               "behavior", "tracks", "signals", "ego"},
                              "scenario");
  Scenario s;
  s.scenario_id = detail::as_string(detail::require(doc, "scenario_id", "scenario"), "scenario_id");
  s.intersection_id = detail::as_string(detail::require(doc, "intersection_id", "scenario"), "intersection_id");
  s.tick_hz = static_cast<int>(detail::as_integer(detail::require(doc, "tick_hz", "scenario"), "tick_hz"));
  s.n_ticks = static_cast<int>(detail::as_integer(detail::require(doc, "n_ticks", "scenario"), "n_ticks"));
  s.weather = parse_weather(detail::as_string(detail::require(doc, "weather", "scenario"), "weather"));
  s.time_of_day = parse_time_of_day(detail::as_string(detail::require(doc, "time_of_day", "scenario"), "time_of_day"));

  const json& jb = detail::require(doc, "behavior", "scenario");
  if (!jb.is_null()) {
    detail::reject_unknown_keys(jb, {"main", "sub"}, "behavior");
    s.behavior = BehaviorLabel{parse_main_behavior(detail::as_string(detail::require(jb, "main", "behavior"), "main")),
                               parse_sub_behavior(detail::as_string(detail::require(jb, "sub", "behavior"), "sub"))};
  }

  for (const auto& jt : detail::as_array(detail::require(doc, "tracks", "scenario"), "tracks")) {
    detail::reject_unknown_keys(jt, {"track_id", "category", "length", "width", "height", "samples"}, "track");
    AgentTrack t;
    t.track_id = detail::as_string(detail::require(jt, "track_id", "track"), "track_id");
    t.category = parse_category(detail::as_string(detail::require(jt, "category", "track"), "category"));
    t.length = detail::as_number(detail::require(jt, "length", "track"), "length");
    t.width = detail::as_number(detail::require(jt, "width", "track"), "width");
    // height is accepted for 3D sources and dropped: the model is planar.
    if (auto it = jt.find("height"); it != jt.end()) detail::as_number(*it, "height");
    for (const auto& js : detail::as_array(detail::require(jt, "samples", "track"), "samples")) {
      if (!js.is_array() || js.size() != 5) throw ParseError("track.samples: expected [tick, x, y, heading, speed]");
      TrackSample smp;
      smp.tick = static_cast<int>(detail::as_integer(js[0], "sample.tick"));
      smp.pose = {detail::as_number(js[1], "sample.x"), detail::as_number(js[2], "sample.y"),
                  detail::as_number(js[3], "sample.heading")};
      smp.speed = detail::as_number(js[4], "sample.speed");
      t.samples.push_back(smp);
    }
    s.tracks.push_back(std::move(t));
  }

  for (const auto& jg : detail::as_array(detail::require(doc, "signals", "scenario"), "signals")) {
    detail::reject_unknown_keys(jg, {"group_id", "stop_line", "controlled_lane_ids", "schedule"}, "signal");
    SignalGroup g;
    g.group_id = detail::as_string(detail::require(jg, "group_id", "signal"), "group_id");
    const Polyline seg = detail::as_points(detail::require(jg, "stop_line", "signal"), "stop_line");
    if (seg.size() != 2) throw ParseError("signal.stop_line: expected two points");
    g.stop_line = {seg[0], seg[1]};
    std::set<std::string> lanes;
    for (const auto& jl : detail::as_array(detail::require(jg, "controlled_lane_ids", "signal"), "controlled_lane_ids"))
      lanes.insert(detail::as_string(jl, "controlled_lane_ids[]"));
    g.controlled_lane_ids.assign(lanes.begin(), lanes.end());
    for (const auto& je : detail::as_array(detail::require(jg, "schedule", "signal"), "schedule")) {
      if (!je.is_array() || je.size() != 2) throw ParseError("signal.schedule: expected [tick, state]");
      g.schedule.emplace_back(static_cast<int>(detail::as_integer(je[0], "schedule.tick")),
                              parse_signal_state(detail::as_string(je[1], "schedule.state")));
    }
    s.signals.push_back(std::move(g));
  }

  const json& je = detail::require(doc, "ego", "scenario");
  detail::reject_unknown_keys(je, {"agent_id", "source", "destination", "route_waypoints"}, "ego");
  s.ego.agent_id = detail::as_string(detail::require(je, "agent_id", "ego"), "ego.agent_id");
  s.ego.source = pose_from_json(detail::require(je, "source", "ego"), "ego.source");
  s.ego.destination = pose_from_json(detail::require(je, "destination", "ego"), "ego.destination");
  s.ego.route_waypoints = detail::as_points(detail::require(je, "route_waypoints", "ego"), "ego.route_waypoints");

  check_scenario(s);
  return s;
}

Scenario load_scenario(std::string_view text) { return scenario_from_json(detail::parse_json(text, "scenario")); }

json scenario_to_json(const Scenario& s) {
  json tracks = json::array();
  for (const auto& t : s.tracks) {
    json samples = json::array();
    for (const auto& smp : t.samples)
      samples.push_back(json::array({smp.tick, smp.pose.x, smp.pose.y, smp.pose.heading, smp.speed}));
    tracks.push_back({{"track_id", t.track_id},
                      {"category", std::string(to_string(t.category))},
                      {"length", t.length},
                      {"width", t.width},
                      {"samples", samples}});
  }
  json signals = json::array();
  for (const auto& g : s.signals) {
    json schedule = json::array();
    for (const auto& [tick, st] : g.schedule) schedule.push_back(json::array({tick, std::string(to_string(st))}));
    signals.push_back({{"group_id", g.group_id},
                       {"stop_line", detail::points_json({g.stop_line.a, g.stop_line.b})},
                       {"controlled_lane_ids", g.controlled_lane_ids},
                       {"schedule", schedule}});
  }
  return {{"scenario_id", s.scenario_id},
          {"intersection_id", s.intersection_id},
          {"tick_hz", s.tick_hz},
          {"n_ticks", s.n_ticks},
          {"weather", std::string(to_string(s.weather))},
          {"time_of_day", std::string(to_string(s.time_of_day))},
          {"behavior", s.behavior ? behavior_to_json(*s.behavior) : json(nullptr)},
          {"tracks", tracks},
          {"signals", signals},
          {"ego",
           {{"agent_id", s.ego.agent_id},
            {"source", pose_json(s.ego.source)},
            {"destination", pose_json(s.ego.destination)},
            {"route_waypoints", detail::points_json(s.ego.route_waypoints)}}}};
}

std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump() + "\n"; }

std::vector<Violation> validate_scenario(const Scenario& s, const HDMapModel& m) {
  std::vector<Violation> out;
  const Bounds b = m.bounds();
  for (const auto& t : s.tracks) {
    for (const auto& smp : t.samples) {
      if (!b.contains(smp.pose.position(), 50.0)) {
        out.push_back({"track-out-of-bounds", t.track_id + " at tick " + std::to_string(smp.tick)});
        break;
      }
    }
  }
  for (std::size_t i = 0; i < s.ego.route_waypoints.size(); ++i) {
    if (!point_in_drivable(m, s.ego.route_waypoints[i]))
      out.push_back({"route-off-drivable", "route waypoint " + std::to_string(i)});
  }
  for (const auto& g : s.signals) {
    for (const auto& lane : g.controlled_lane_ids) {
      if (m.find_lane(lane) == nullptr) out.push_back({"dangling-lane-ref", g.group_id + " -> " + lane});
    }
  }
  return out;
}

namespace {

TrackState interpolate_ticks(const AgentTrack& t, double u) {
  const auto& smp = t.samples;
  if (smp.empty() || u < smp.front().tick || u > smp.back().tick)
    throw ArgumentError("sample_track_pose: time outside track span of '" + t.track_id + "'");
  auto hi = std::lower_bound(smp.begin(), smp.end(), u,
                             [](const TrackSample& a, double v) { return static_cast<double>(a.tick) < v; });
  if (static_cast<double>(hi->tick) == u) return {hi->pose, hi->speed};
  auto lo = hi - 1;
  const double f = (u - lo->tick) / static_cast<double>(hi->tick - lo->tick);
  const Pose2& a = lo->pose;
  const Pose2& b = hi->pose;
  TrackState out;
  out.pose.x = a.x + (b.x - a.x) * f;
  out.pose.y = a.y + (b.y - a.y) * f;
  out.pose.heading = normalize_angle(a.heading + angle_diff(b.heading, a.heading) * f);
  out.speed = lo->speed + (hi->speed - lo->speed) * f;
  return out;
}

}  // namespace

TrackState sample_track_pose(const AgentTrack& t, double time_s) {
  double u = time_s * kTickHz;
  const double nearest = std::round(u);
  if (std::abs(u - nearest) < 1e-9) u = nearest;
  return interpolate_ticks(t, u);
}

std::optional<TrackState> track_state_at_tick(const AgentTrack& t, int tick) {
  if (!t.alive_at(tick)) return std::nullopt;
  return interpolate_ticks(t, static_cast<double>(tick));
}

EgoAssignment make_ego_assignment(const AgentTrack& t, double spacing) {
  EgoAssignment e;
  e.agent_id = t.track_id;
  e.source = t.samples.front().pose;
  e.destination = t.samples.back().pose;
  const Polyline path = t.path();
  e.route_waypoints = resample_polyline(path, spacing);
  return e;
}

std::map<std::string, double> DistributionReport::fractions(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [_, n] : counts) total += n;
  std::map<std::string, double> out;
  for (const auto& [k, n] : counts) out[k] = total == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(total);
  return out;
}

DistributionReport scenario_stats(std::span<const Scenario> set) {
  if (set.empty()) throw ArgumentError("scenario_stats: empty scenario set");
  DistributionReport r;
  r.n_scenarios = set.size();
  for (const auto& s : set) {
    r.behavior_counts[s.behavior ? std::string(to_string(s.behavior->main)) : "unlabeled"]++;
    r.weather_counts[std::string(to_string(s.weather))]++;
    r.time_counts[std::string(to_string(s.time_of_day))]++;
    for (const auto& t : s.tracks) r.category_counts[std::string(to_string(t.category))]++;
  }
  return r;
}

json stats_to_json(const DistributionReport& r) {
  auto dim = [](const std::map<std::string, std::size_t>& counts) {
    return json{{"counts", counts}, {"fractions", DistributionReport::fractions(counts)}};
  };
  return {{"n_scenarios", r.n_scenarios},
          {"behavior", dim(r.behavior_counts)},
          {"category", dim(r.category_counts)},
          {"weather", dim(r.weather_counts)},
          {"time_of_day", dim(r.time_counts)}};
}

Scenario transform_scenario(const Scenario& s, const RigidTransform& tf) {
  Scenario out = s;
  for (auto& t : out.tracks)
    for (auto& smp : t.samples) smp.pose = tf.apply(smp.pose);
  for (auto& g : out.signals) g.stop_line = tf.apply(g.stop_line);
  out.ego.source = tf.apply(s.ego.source);
  out.ego.destination = tf.apply(s.ego.destination);
  out.ego.route_waypoints = tf.apply(s.ego.route_waypoints);
  return out;
}

}  // namespace twinbench
