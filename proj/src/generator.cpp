#include "twinbench/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json_util.hpp"
#include "twinbench/policy.hpp"
#include "twinbench/replay.hpp"
#include "twinbench/vehicle.hpp"

namespace twinbench {

using detail::json;

namespace {

constexpr double kLaneWidth = 3.5;
constexpr double kMedianHalf = 2.0;
constexpr double kRoadHalf = 9.0;
constexpr double kStopDist = 15.0;
constexpr double kCrosswalkNear = 10.0;
constexpr double kCrosswalkFar = 14.0;
constexpr double kRoadEnd = 80.0;
constexpr double kInnerX = kMedianHalf + 0.5 * kLaneWidth;
constexpr double kOuterX = kMedianHalf + 1.5 * kLaneWidth;
constexpr double kLaneX[2] = {kInnerX, kOuterX};

constexpr double kLeftRadius = 18.0;
constexpr double kRightRadius = 7.5;
constexpr double kUturnRadius = 0.5 * (kInnerX + kOuterX);
constexpr double kUturnEarlyY = -18.0;

constexpr double kDenseStep = 0.25;
constexpr double kLateralAccel = 2.0;
constexpr double kRefAccel = 1.5;
constexpr double kRefDecel = 2.0;
constexpr int kStopDwellTicks = 40;

constexpr double kEgoClearance = 6.0;
constexpr double kAgentClearance = 2.0;
constexpr double kIpcGap = 2.0;
constexpr double kCovGap = 2.5;

Vec2 rot(Vec2 p, int k) {
  for (int i = 0; i < ((k % 4) + 4) % 4; ++i) p = {-p.y, p.x};
  return p;
}

double rot_heading(double h, int k) { return normalize_angle(h + (((k % 4) + 4) % 4) * (kPi / 2.0)); }

Polyline rot(const Polyline& pts, int k) {
  Polyline out;
  out.reserve(pts.size());
  for (Vec2 p : pts) out.push_back(rot(p, k));
  return out;
}

int wrap4(int k) { return ((k % 4) + 4) % 4; }

std::string lane_id(int approach, const std::string& kind) { return "a" + std::to_string(approach) + "_" + kind; }
std::string group_id(int approach) { return "sg" + std::to_string(approach); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int index(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

 private:
  std::mt19937_64 eng_;
};

/// Dense path with per-point curvature magnitude.
struct PathBuilder {
  Polyline pts;
  std::vector<double> kappa;

  explicit PathBuilder(Vec2 start) : pts{start}, kappa{0.0} {}

  void line_to(Vec2 p, double step = kDenseStep) {
    const Vec2 a = pts.back();
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, p) / step)));
    for (int i = 1; i <= n; ++i) {
      pts.push_back(a + (p - a) * (static_cast<double>(i) / n));
      kappa.push_back(0.0);
    }
  }

  void arc(Vec2 centre, double radius, double a0, double a1, double step = kDenseStep) {
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(a1 - a0) * radius / step)));
    kappa.back() = 1.0 / radius;
    for (int i = 1; i <= n; ++i) {
      const double a = a0 + (a1 - a0) * (static_cast<double>(i) / n);
      pts.push_back(centre + Vec2{std::cos(a), std::sin(a)} * radius);
      kappa.push_back(1.0 / radius);
    }
  }

  double length() const { return polyline_length(pts); }
};

/// Arc-length lookups on a fixed polyline.
class PathIndex {
 public:
  explicit PathIndex(Polyline pts) : pts_(std::move(pts)), cum_(cumulative_lengths(pts_)) {}

  double length() const { return cum_.back(); }
  const Polyline& points() const { return pts_; }

  Pose2 pose_at(double s) const {
    const std::size_t i = segment_at(s);
    const Vec2 a = pts_[i], b = pts_[i + 1];
    const double seg = cum_[i + 1] - cum_[i];
    const double f = seg > 0.0 ? std::clamp((s - cum_[i]) / seg, 0.0, 1.0) : 0.0;
    const Vec2 p = a + (b - a) * f;
    return {p.x, p.y, normalize_angle(std::atan2(b.y - a.y, b.x - a.x))};
  }

  std::size_t segment_at(double s) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    const std::size_t hi = static_cast<std::size_t>(std::distance(cum_.begin(), it));
    return std::clamp<std::size_t>(hi == 0 ? 0 : hi - 1, 0, pts_.size() - 2);
  }

  double cum(std::size_t i) const { return cum_[i]; }

 private:
  Polyline pts_;
  std::vector<double> cum_;
};

enum class Maneuver { straight, left, right, uturn, uturn_early };

Maneuver maneuver_for(SubBehavior b) {
  switch (b) {
    case SubBehavior::LFT:
    case SubBehavior::IPC_LFT:
    case SubBehavior::COV_LFT:
    case SubBehavior::YLW_LFT: return Maneuver::left;
    case SubBehavior::RT:
    case SubBehavior::IPC_RT:
    case SubBehavior::COV_RT: return Maneuver::right;
    case SubBehavior::UT_N: return Maneuver::uturn;
    case SubBehavior::UT_AN: return Maneuver::uturn_early;
    default: return Maneuver::straight;
  }
}

struct EgoPath {
  PathBuilder path;
  double clip_end_s = 0.0;
};

/// Canonical (south approach) paths. `end_offset` is how far beyond the
/// intersection the recorded clip stops.
EgoPath ego_path(Maneuver m, int lane, double start_y, double end_offset) {
  EgoPath out{PathBuilder({kLaneX[lane], start_y}), 0.0};
  PathBuilder& b = out.path;
  switch (m) {
    case Maneuver::straight:
      b.line_to({kLaneX[lane], end_offset});
      out.clip_end_s = b.length();
      b.line_to({kLaneX[lane], kRoadEnd});
      break;
    case Maneuver::left:
      b.line_to({kInnerX, -kStopDist + 0.75});
      b.arc({-kStopDist + 0.75, -kStopDist + 0.75}, kLeftRadius, 0.0, kPi / 2.0);
      b.line_to({-end_offset, kInnerX});
      out.clip_end_s = b.length();
      b.line_to({-kRoadEnd, kInnerX});
      break;
    case Maneuver::right:
      b.line_to({kOuterX, -kStopDist + 0.25});
      b.arc({kStopDist - 0.25, -kStopDist + 0.25}, kRightRadius, kPi, kPi / 2.0);
      b.line_to({end_offset, -kOuterX});
      out.clip_end_s = b.length();
      b.line_to({kRoadEnd, -kOuterX});
      break;
    case Maneuver::uturn:
    case Maneuver::uturn_early: {
      const double yc = m == Maneuver::uturn ? 0.0 : kUturnEarlyY;
      const double xc = 0.5 * (kInnerX - kOuterX);
      b.line_to({kInnerX, yc});
      b.arc({xc, yc}, kUturnRadius, 0.0, kPi);
      b.line_to({-kOuterX, -end_offset});
      out.clip_end_s = b.length();
      b.line_to({-kOuterX, -kRoadEnd});
      break;
    }
  }
  return out;
}

/// Lane-following path used by background vehicles (canonical approach).
PathBuilder vehicle_path(Maneuver m, int lane) {
  EgoPath e = ego_path(m, lane, -kRoadEnd, kRoadEnd);
  return e.path;
}

std::vector<double> speed_profile(const PathBuilder& p, double cruise) {
  const auto cum = cumulative_lengths(p.pts);
  std::vector<double> v(p.pts.size(), cruise);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (p.kappa[i] > 0.0) v[i] = std::min(v[i], std::sqrt(kLateralAccel / p.kappa[i]));
  }
  for (std::size_t i = v.size() - 1; i-- > 0;)
    v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * kRefDecel * (cum[i + 1] - cum[i])));
  return v;
}

struct Reference {
  std::vector<double> s;  ///< arc length per tick
  int clip_end_tick = 0;
  int green_tick = -1;    ///< release of a red-light stop
};

/// Time-indexed reference along `path`. With `stop_s`, the motion halts there
/// and resumes after a fixed dwell.
Reference time_reference(const PathIndex& path, const std::vector<double>& profile, double clip_end_s, double v0,
                         std::optional<double> stop_s) {
  auto cap_at = [&](double s) {
    const std::size_t i = path.segment_at(s);
    return std::min(profile[i], profile[i + 1]);
  };
  Reference ref;
  ref.clip_end_tick = -1;
  double s = 0.0, v = std::min(v0, cap_at(0.0));
  bool released = !stop_s.has_value();
  int stopped = 0;
  for (int t = 0;; ++t) {
    ref.s.push_back(s);
    if (ref.clip_end_tick < 0 && s >= clip_end_s) ref.clip_end_tick = t;
    if (ref.clip_end_tick >= 0 && t >= ref.clip_end_tick + kPlanHorizon + 1) break;
    if (t > 20000) throw Error("generator: reference did not reach the clip end");

    if (!released && s >= *stop_s) {
      if (++stopped >= kStopDwellTicks) {
        released = true;
        ref.green_tick = t + 1;
      }
      continue;
    }
    double cap = cap_at(s);
    if (!released) cap = std::min(cap, std::sqrt(2.0 * kRefDecel * std::max(0.0, *stop_s - s)));
    const double v_next = std::min(v + kRefAccel * kTickDt, cap);
    double s_next = s + 0.5 * (v + v_next) * kTickDt;
    v = v_next;
    if (!released && s_next >= *stop_s - 0.02) {
      s_next = *stop_s;
      v = 0.0;
    }
    s = std::min(s_next, path.length());
  }
  return ref;
}

/// Drives the bicycle model along a time-indexed reference and records it.
AgentTrack record_ego(const PathIndex& path, const Reference& ref, double v0) {
  AgentTrack t;
  t.track_id = "ego";
  t.category = AgentCategory::car;
  std::tie(t.length, t.width) = default_dimensions(AgentCategory::car);
  EgoState st;
  st.pose = path.pose_at(0.0);
  st.speed = v0;
  WaypointController ctl(VehicleParams{}, TrackingParams{}, kTickDt);
  const int last = static_cast<int>(ref.s.size()) - 1;
  for (int tick = 0; tick <= ref.clip_end_tick; ++tick) {
    t.samples.push_back({tick, st.pose, st.speed});
    Polyline plan;
    for (int k = 1; k <= kPlanHorizon; ++k) plan.push_back(path.pose_at(ref.s[std::min(tick + k, last)]).position());
    st = integrate_ego(st, ctl.follow_plan(st, plan), kTickDt, VehicleParams{});
  }
  return t;
}

double min_gap(const AgentTrack& a, const AgentTrack& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sa : a.samples) {
    const auto sb = track_state_at_tick(b, sa.tick);
    if (sb) best = std::min(best, obb_distance(a.box_at(sa.pose), b.box_at(sb->pose)));
  }
  return best;
}

struct Crossing {
  double time_s = 0.0;
  Vec2 point;
  double heading = 0.0;
};

/// First place where `value(sample)` changes sign along the recorded track.
template <class F>
std::optional<Crossing> first_crossing(const AgentTrack& t, F value) {
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    const double a = value(t.samples[i - 1], i - 1), b = value(t.samples[i], i);
    if ((a < 0.0) == (b < 0.0)) continue;
    const double f = a == b ? 0.0 : a / (a - b);
    const auto& p = t.samples[i - 1].pose;
    const auto& q = t.samples[i].pose;
    Crossing c;
    c.time_s = (t.samples[i - 1].tick + f) * kTickDt;
    c.point = p.position() + (q.position() - p.position()) * f;
    c.heading = normalize_angle(p.heading + angle_diff(q.heading, p.heading) * f);
    return c;
  }
  return std::nullopt;
}

/// Straight constant-speed mover passing `at` at time `pass_time_s`.
AgentTrack crossing_agent(const std::string& id, AgentCategory cat, Vec2 at, double heading, double speed,
                          double pass_time_s, double half_span, int n_ticks) {
  AgentTrack t;
  t.track_id = id;
  t.category = cat;
  std::tie(t.length, t.width) = default_dimensions(cat);
  const Vec2 dir = unit_from_angle(heading);
  for (int tick = 0; tick < n_ticks; ++tick) {
    const double off = speed * (tick * kTickDt - pass_time_s);
    if (std::abs(off) > half_span) continue;
    const Vec2 p = at + dir * off;
    t.samples.push_back({tick, {p.x, p.y, normalize_angle(heading)}, speed});
  }
  return t;
}

/// Places a crossing agent so that it clears the ego by exactly `gap` while
/// passing ahead of it.
AgentTrack place_conflict(const AgentTrack& ego, const std::string& id, AgentCategory cat, const Crossing& c,
                          double heading, double speed, double half_span, double lead_max_s, double gap, int n_ticks) {
  auto gap_for = [&](double lead) {
    const AgentTrack a = crossing_agent(id, cat, c.point, heading, speed, c.time_s - lead, half_span, n_ticks);
    return a.samples.empty() ? std::numeric_limits<double>::infinity() : min_gap(ego, a);
  };
  double lo = 0.0, hi = lead_max_s;
  if (!(gap_for(lo) < gap && gap_for(hi) > gap)) throw ArgumentError("generator: cannot place the conflict agent");
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (gap_for(mid) < gap ? lo : hi) = mid;
  }
  AgentTrack a = crossing_agent(id, cat, c.point, heading, speed, c.time_s - hi, half_span, n_ticks);
  if (a.samples.size() < 2) throw ArgumentError("generator: conflict agent falls outside the clip");
  return a;
}

using Schedule = std::vector<std::pair<int, SignalState>>;

Schedule make_schedule(std::initializer_list<std::pair<int, SignalState>> entries) {
  Schedule out;
  for (auto e : entries) {
    e.first = std::max(0, e.first);
    while (!out.empty() && out.back().first >= e.first) out.pop_back();
    if (out.empty() && e.first > 0) continue;
    if (!out.empty() && out.back().second == e.second) continue;
    out.push_back(e);
  }
  return out;
}

/// Background vehicle on a lane path with signal-compliant stops.
std::optional<AgentTrack> lane_vehicle(const std::string& id, AgentCategory cat, const PathIndex& path,
                                       const SignalGroup& group, double s0, int start_tick, double cruise, int n_ticks) {
  AgentTrack t;
  t.track_id = id;
  t.category = cat;
  std::tie(t.length, t.width) = default_dimensions(cat);
  const double stop_s = kRoadEnd - kStopDist - 0.5 * t.length - 1.0;
  constexpr double decel = 3.0, accel = 2.0;
  double s = s0, v = cruise;
  if (s0 < stop_s && signal_state_at(group, start_tick) != SignalState::green)
    v = std::min(v, std::sqrt(2.0 * decel * (stop_s - s0)));
  for (int tick = start_tick; tick < n_ticks && s < path.length() - 0.5; ++tick) {
    t.samples.push_back({tick, path.pose_at(s), v});
    double cap = cruise;
    bool holding = false;
    if (s < stop_s && signal_state_at(group, tick) != SignalState::green) {
      const double room = stop_s - s;
      if (v * v / (2.0 * decel) <= room + 1.0) {
        cap = std::min(cap, std::sqrt(2.0 * decel * room));
        holding = true;
      }
    }
    const double v_next = std::min(v + accel * kTickDt, cap);
    s += 0.5 * (v + v_next) * kTickDt;
    v = v_next;
    if (holding && s >= stop_s - 0.02) {
      s = stop_s;
      v = 0.0;
    }
  }
  if (t.samples.size() < 5) return std::nullopt;
  return t;
}

AgentCategory background_vehicle_category(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.7) return AgentCategory::car;
  if (u < 0.8) return AgentCategory::van;
  if (u < 0.9) return AgentCategory::truck;
  return AgentCategory::bus;
}

Pose2 rotate_pose(const Pose2& p, int k) {
  const Vec2 q = rot(p.position(), k);
  return {q.x, q.y, rot_heading(p.heading, k)};
}

}  // namespace

// ---------------------------------------------------------------------------

HDMapModel make_intersection_map(const std::string& map_id) {
  HDMapModel m;
  m.map_id = map_id;
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 2; ++i) {
      const std::string idx = std::to_string(i);
      Lane in{lane_id(k, "in_" + idx), rot(Polyline{{kLaneX[i], -kRoadEnd}, {kLaneX[i], -kStopDist}}, k), kLaneWidth,
              {lane_id(k, "st_" + idx), lane_id(k, i == 0 ? "lt" : "rt")}, group_id(k)};
      Lane st{lane_id(k, "st_" + idx), rot(Polyline{{kLaneX[i], -kStopDist}, {kLaneX[i], kStopDist}}, k), kLaneWidth,
              {lane_id(wrap4(k + 2), "out_" + idx)}, std::nullopt};
      Lane out{lane_id(k, "out_" + idx), rot(Polyline{{-kLaneX[i], -kStopDist}, {-kLaneX[i], -kRoadEnd}}, k),
               kLaneWidth, {}, std::nullopt};
      m.lanes.push_back(std::move(in));
      m.lanes.push_back(std::move(st));
      m.lanes.push_back(std::move(out));
    }
    PathBuilder left({kInnerX, -kStopDist});
    left.line_to({kInnerX, -kStopDist + 0.75}, 1.0);
    left.arc({-kStopDist + 0.75, -kStopDist + 0.75}, kLeftRadius, 0.0, kPi / 2.0, 1.5);
    left.line_to({-kStopDist, kInnerX}, 1.0);
    m.lanes.push_back({lane_id(k, "lt"), rot(left.pts, k), kLaneWidth, {lane_id(wrap4(k + 3), "out_0")}, std::nullopt});
    PathBuilder right({kOuterX, -kStopDist});
    right.line_to({kOuterX, -kStopDist + 0.25}, 1.0);
    right.arc({kStopDist - 0.25, -kStopDist + 0.25}, kRightRadius, kPi, kPi / 2.0, 1.0);
    right.line_to({kStopDist, -kOuterX}, 1.0);
    m.lanes.push_back(
        {lane_id(k, "rt"), rot(right.pts, k), kLaneWidth, {lane_id(wrap4(k + 1), "out_1")}, std::nullopt});

    m.crosswalks.push_back(rot(Polygon{{-kRoadHalf, -kCrosswalkFar},
                                       {kRoadHalf, -kCrosswalkFar},
                                       {kRoadHalf, -kCrosswalkNear},
                                       {-kRoadHalf, -kCrosswalkNear}},
                               k));
    m.stop_lines.push_back(
        {{rot(Vec2{kMedianHalf, -kStopDist}, k), rot(Vec2{kRoadHalf, -kStopDist}, k)}, group_id(k)});
    m.drivable_area.push_back(rot(
        Polygon{{-kRoadHalf, -kRoadEnd}, {kRoadHalf, -kRoadEnd}, {kRoadHalf, -kRoadHalf}, {-kRoadHalf, -kRoadHalf}},
        k));
    m.drivable_area.push_back(rot(Polygon{{kRoadHalf, -kRoadHalf - 10.0},
                                          {kRoadHalf + 10.0, -kRoadHalf},
                                          {kRoadHalf, -kRoadHalf}},
                                  k));
  }
  m.drivable_area.push_back({{-kRoadHalf, -kRoadHalf}, {kRoadHalf, -kRoadHalf}, {kRoadHalf, kRoadHalf}, {-kRoadHalf, kRoadHalf}});
  check_map(m);
  return m;
}

std::string_view to_string(LightPlan p) {
  switch (p) {
    case LightPlan::automatic: return "auto";
    case LightPlan::green: return "green";
    case LightPlan::red_then_green: return "red-then-green";
    case LightPlan::yellow: return "yellow";
  }
  return "?";
}

LightPlan parse_light_plan(std::string_view s) {
  if (s == "auto") return LightPlan::automatic;
  if (s == "green") return LightPlan::green;
  if (s == "red-then-green") return LightPlan::red_then_green;
  if (s == "yellow") return LightPlan::yellow;
  throw ParseError("light_plan: unknown value '" + std::string(s) + "'");
}

json generator_spec_to_json(const GeneratorSpec& g) {
  json j = {{"behavior", to_string(g.behavior)},
            {"n_background", g.n_background},
            {"light_plan", to_string(g.light_plan)},
            {"seed", g.seed}};
  if (g.approach) j["approach"] = *g.approach;
  if (g.conflict_category) j["conflict_category"] = to_string(*g.conflict_category);
  if (g.weather) j["weather"] = to_string(*g.weather);
  if (g.time_of_day) j["time_of_day"] = to_string(*g.time_of_day);
  if (!g.scenario_id.empty()) j["scenario_id"] = g.scenario_id;
  return j;
}

GeneratorSpec generator_spec_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"behavior", "n_background", "light_plan", "seed", "approach", "conflict_category",
                               "weather", "time_of_day", "scenario_id"},
                              "generator spec");
  GeneratorSpec g;
  g.behavior = parse_sub_behavior(detail::as_string(detail::require(j, "behavior", "generator spec"), "behavior"));
  if (auto it = j.find("n_background"); it != j.end())
    g.n_background = static_cast<int>(detail::as_integer(*it, "n_background"));
  if (auto it = j.find("light_plan"); it != j.end()) g.light_plan = parse_light_plan(detail::as_string(*it, "light_plan"));
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0))
      throw ParseError("seed: expected non-negative integer");
    g.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("approach"); it != j.end()) g.approach = static_cast<int>(detail::as_integer(*it, "approach"));
  if (auto it = j.find("conflict_category"); it != j.end())
    g.conflict_category = parse_category(detail::as_string(*it, "conflict_category"));
  if (auto it = j.find("weather"); it != j.end()) g.weather = parse_weather(detail::as_string(*it, "weather"));
  if (auto it = j.find("time_of_day"); it != j.end())
    g.time_of_day = parse_time_of_day(detail::as_string(*it, "time_of_day"));
  if (auto it = j.find("scenario_id"); it != j.end()) g.scenario_id = detail::as_string(*it, "scenario_id");
  return g;
}

std::pair<Scenario, HDMapModel> generate_synthetic(const GeneratorSpec& spec) {
  const SubBehavior sub = spec.behavior;
  const MainBehavior main = main_of(sub);
  if (spec.n_background < 0 || spec.n_background > 20)
    throw ArgumentError("generator: n_background must lie in [0, 20]");
  if (spec.approach && (*spec.approach < 0 || *spec.approach > 3))
    throw ArgumentError("generator: approach must lie in [0, 3]");
  LightPlan plan = spec.light_plan;
  const LightPlan wanted = main == MainBehavior::YLW   ? LightPlan::yellow
                           : main == MainBehavior::STP ? LightPlan::red_then_green
                                                       : LightPlan::green;
  if (plan == LightPlan::automatic) plan = wanted;
  if (plan != wanted)
    throw ArgumentError("generator: light plan '" + std::string(to_string(plan)) + "' cannot realize " +
                        std::string(to_string(sub)));
  AgentCategory partner = AgentCategory::pedestrian;
  if (spec.conflict_category) {
    if (main != MainBehavior::IPC) throw ArgumentError("generator: conflict_category applies to IPC labels only");
    if (*spec.conflict_category != AgentCategory::pedestrian && *spec.conflict_category != AgentCategory::cyclist)
      throw ArgumentError("generator: IPC partner must be a pedestrian or cyclist");
    partner = *spec.conflict_category;
  }

  Rng rng(spec.seed);
  const int approach = spec.approach ? *spec.approach : rng.index(4);
  const Weather weather = spec.weather ? *spec.weather : kAllWeather[static_cast<std::size_t>(rng.index(6))];
  const TimeOfDay tod = spec.time_of_day ? *spec.time_of_day : kAllTimes[static_cast<std::size_t>(rng.index(5))];
  const Maneuver man = maneuver_for(sub);
  const int lane = man == Maneuver::straight ? rng.index(2) : (man == Maneuver::right ? 1 : 0);
  const double start_y = -rng.uniform(48.0, 62.0);
  const double end_offset = rng.uniform(35.0, 45.0);
  const double cruise = rng.uniform(6.0, 9.0);

  // Ego reference and recording, in the canonical frame (ego from the south).
  EgoPath ep = ego_path(man, lane, start_y, end_offset);
  const PathIndex path(ep.path.pts);
  const auto profile = speed_profile(ep.path, cruise);
  std::optional<double> stop_s;
  if (main == MainBehavior::STP) {
    const double line_s = -kStopDist - start_y;
    stop_s = line_s - 0.5 * default_dimensions(AgentCategory::car).first - 1.5;
  }
  const Reference ref = time_reference(path, profile, ep.clip_end_s, cruise, stop_s);
  AgentTrack ego = record_ego(path, ref, std::min(cruise, profile.front()));
  const int n_ticks = ref.clip_end_tick + 1;

  // Signals. Phase A serves the ego approach and its opposite.
  const Segment ego_stop{{kMedianHalf, -kStopDist}, {kRoadHalf, -kStopDist}};
  Schedule phase_a, phase_b;
  switch (plan) {
    case LightPlan::red_then_green: {
      const int g = ref.green_tick;
      phase_a = make_schedule({{0, SignalState::red}, {g, SignalState::green}});
      phase_b = make_schedule({{0, SignalState::green}, {g - 40, SignalState::yellow}, {g - 10, SignalState::red}});
      break;
    }
    case LightPlan::yellow: {
      int cross = -1;
      const int up = signed_side(ego_stop, {kInnerX, -kRoadEnd});
      for (std::size_t i = 1; i < ego.samples.size() && cross < 0; ++i) {
        if (crosses_stop_line(ego_stop, up, ego.samples[i - 1].pose.position(), ego.samples[i].pose.position()))
          cross = ego.samples[i].tick;
      }
      if (cross < 15) throw ArgumentError("generator: ego never crosses its stop line on yellow");
      phase_a = make_schedule({{0, SignalState::green}, {cross - 12, SignalState::yellow}, {cross + 18, SignalState::red}});
      phase_b = make_schedule({{0, SignalState::red}, {cross + 38, SignalState::green}});
      break;
    }
    default:
      phase_a = make_schedule({{0, SignalState::green}});
      phase_b = make_schedule({{0, SignalState::red}});
      break;
  }
  std::vector<SignalGroup> groups;
  for (int j = 0; j < 4; ++j) {
    const int w = wrap4(j + approach);
    SignalGroup g;
    g.group_id = group_id(w);
    g.stop_line = {rot(ego_stop.a, j), rot(ego_stop.b, j)};
    g.controlled_lane_ids = {lane_id(w, "in_0"), lane_id(w, "in_1")};
    g.schedule = j % 2 == 0 ? phase_a : phase_b;
    groups.push_back(std::move(g));
  }

  std::vector<AgentTrack> others;
  // Conflict partner for interaction labels.
  if (main == MainBehavior::IPC) {
    std::optional<Crossing> c;
    if (man == Maneuver::straight) {
      c = first_crossing(ego, [](const TrackSample& s, std::size_t) { return s.pose.y - 0.5 * (kCrosswalkNear + kCrosswalkFar); });
    } else if (man == Maneuver::left) {
      c = first_crossing(ego, [](const TrackSample& s, std::size_t) { return -0.5 * (kCrosswalkNear + kCrosswalkFar) - s.pose.x; });
    } else {
      c = first_crossing(ego, [](const TrackSample& s, std::size_t) { return s.pose.x - 0.5 * (kCrosswalkNear + kCrosswalkFar); });
    }
    if (!c) throw ArgumentError("generator: ego path misses the exit crosswalk");
    const double side = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const bool ped = partner == AgentCategory::pedestrian;
    others.push_back(place_conflict(ego, ped ? "ped-0" : "cyc-0", partner, *c, c->heading + side * kPi / 2.0,
                                    ped ? 1.4 : 4.0, ped ? 12.0 : 15.0, ped ? 8.0 : 3.5, kIpcGap, n_ticks));
  } else if (main == MainBehavior::COV) {
    std::optional<Crossing> c;
    if (man == Maneuver::straight) {
      c = first_crossing(ego, [](const TrackSample& s, std::size_t) { return s.pose.y; });
    } else {
      std::vector<double> cum(ego.samples.size(), 0.0);
      for (std::size_t i = 1; i < cum.size(); ++i)
        cum[i] = cum[i - 1] + angle_diff(ego.samples[i].pose.heading, ego.samples[i - 1].pose.heading);
      c = first_crossing(ego, [&](const TrackSample&, std::size_t i) { return std::abs(cum[i]) - kPi / 4.0; });
    }
    if (!c) throw ArgumentError("generator: ego path misses the conflict point");
    others.push_back(
        place_conflict(ego, "veh-0", AgentCategory::car, *c, c->heading - kPi / 2.0, 7.0, 40.0, 4.0, kCovGap, n_ticks));
  }

  // Background traffic by rejection sampling.
  auto clear = [&](const AgentTrack& cand) {
    if (min_gap(ego, cand) < kEgoClearance) return false;
    return std::all_of(others.begin(), others.end(),
                       [&](const AgentTrack& o) { return min_gap(o, cand) >= kAgentClearance; });
  };
  for (int b = 0; b < spec.n_background; ++b) {
    char id[16];
    std::snprintf(id, sizeof id, "bg-%02d", b);
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const int j = rng.index(4);
      std::optional<AgentTrack> cand;
      if (rng.uniform() < 0.2) {
        const double dir = rng.uniform() < 0.5 ? 1.0 : -1.0;
        const double speed = rng.uniform(1.2, 1.5);
        const double y = -0.5 * (kCrosswalkNear + kCrosswalkFar);
        const Vec2 mid = rot(Vec2{0.0, y}, j);
        const double heading = rot_heading(dir > 0 ? 0.0 : kPi, j);
        const double pass = rng.uniform(0.0, 0.1 * n_ticks);
        AgentTrack t = crossing_agent(id, AgentCategory::pedestrian, mid, heading, speed, pass, kRoadHalf + 2.0, n_ticks);
        if (t.samples.size() >= 5) cand = std::move(t);
      } else {
        const double u = rng.uniform();
        const Maneuver m = u < 0.5 ? Maneuver::straight : (u < 0.75 ? Maneuver::left : Maneuver::right);
        const int ln = m == Maneuver::straight ? rng.index(2) : (m == Maneuver::left ? 0 : 1);
        const PathIndex vp(rot(vehicle_path(m, ln).pts, j));
        const AgentCategory cat = background_vehicle_category(rng);
        const double s0 = rng.uniform(0.0, 50.0);
        const int start = rng.index(std::max(1, n_ticks / 2));
        const double speed = rng.uniform(5.0, 9.0);
        cand = lane_vehicle(id, cat, vp, groups[static_cast<std::size_t>(j)], s0, start, speed, n_ticks);
      }
      if (cand && clear(*cand)) {
        others.push_back(std::move(*cand));
        placed = true;
      }
    }
    if (!placed) throw ArgumentError("generator: could not place background agent " + std::string(id));
  }

  // Assemble in the canonical frame, then turn to the requested approach.
  Scenario s;
  s.scenario_id = spec.scenario_id.empty()
                      ? "gen-" + std::string(to_string(sub)) + "-s" + std::to_string(spec.seed)
                      : spec.scenario_id;
  s.intersection_id = kSynthMapId;
  s.n_ticks = n_ticks;
  s.weather = weather;
  s.time_of_day = tod;
  s.behavior = BehaviorLabel::from_sub(sub);
  s.tracks.push_back(std::move(ego));
  for (auto& o : others) s.tracks.push_back(std::move(o));
  for (auto& t : s.tracks)
    for (auto& smp : t.samples) smp.pose = rotate_pose(smp.pose, approach);
  for (auto& g : groups) g.stop_line = {rot(g.stop_line.a, approach), rot(g.stop_line.b, approach)};
  std::sort(groups.begin(), groups.end(), [](const SignalGroup& a, const SignalGroup& b) { return a.group_id < b.group_id; });
  s.signals = std::move(groups);
  s.ego = make_ego_assignment(s.tracks.front());

  HDMapModel map = make_intersection_map();
  check_scenario(s);
  if (const auto v = validate_scenario(s, map); !v.empty())
    throw Error("generator: produced an invalid scenario (" + v.front().code + ": " + v.front().detail + ")");
  return {std::move(s), std::move(map)};
}

std::vector<GeneratorSpec> canonical_suite_specs(int per_label) {
  if (per_label < 1) throw ArgumentError("canonical suite: per_label must be >= 1");
  std::vector<GeneratorSpec> out;
  for (std::size_t i = 0; i < kAllSubBehaviors.size(); ++i) {
    for (int r = 0; r < per_label; ++r) {
      GeneratorSpec g;
      g.behavior = kAllSubBehaviors[i];
      g.seed = 1000 * (i + 1) + static_cast<std::uint64_t>(r);
      g.approach = static_cast<int>((i + static_cast<std::size_t>(r)) % 4);
      g.n_background = r % 3;
      if (main_of(g.behavior) == MainBehavior::IPC)
        g.conflict_category = r % 2 == 0 ? AgentCategory::pedestrian : AgentCategory::cyclist;
      g.scenario_id = "canon-" + std::string(to_string(g.behavior)) + "-" + std::to_string(r);
      out.push_back(std::move(g));
    }
  }
  return out;
}

Corpus canonical_suite(int per_label) {
  Corpus c;
  c.map = make_intersection_map();
  for (const auto& spec : canonical_suite_specs(per_label)) c.scenarios.push_back(generate_synthetic(spec).first);
  return c;
}

}  // namespace twinbench
