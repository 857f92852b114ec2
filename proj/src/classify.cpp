#include <algorithm>
#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "twinbench/forge.hpp"
#include "twinbench/replay.hpp"

namespace twinbench {

using detail::json;

namespace {

constexpr double kRadToDeg = 180.0 / kPi;

std::vector<double> cumulative_heading_deg(const AgentTrack& t) {
  std::vector<double> out(t.samples.size(), 0.0);
  for (std::size_t i = 1; i < t.samples.size(); ++i)
    out[i] = out[i - 1] + angle_diff(t.samples[i].pose.heading, t.samples[i - 1].pose.heading) * kRadToDeg;
  return out;
}

std::optional<Vec2> segment_crossing(const Segment& a, const Segment& b) {
  if (!segments_intersect(a, b)) return std::nullopt;
  const Vec2 r = a.b - a.a;
  const Vec2 q = b.b - b.a;
  const double denom = cross(r, q);
  if (std::abs(denom) <= kGeomEps) {
    // Collinear overlap: any shared endpoint lies on both.
    for (Vec2 p : {a.a, a.b, b.a, b.b}) {
      if (point_segment_distance(p, a) <= 1e-7 && point_segment_distance(p, b) <= 1e-7) return p;
    }
    return a.a;
  }
  const double u = cross(b.a - a.a, q) / denom;
  return a.a + r * std::clamp(u, 0.0, 1.0);
}

bool paths_cross_inside(const Polyline& a, const Polyline& b, const Polygon& region) {
  for (std::size_t i = 1; i < a.size(); ++i) {
    const Segment sa{a[i - 1], a[i]};
    if (sa.length() <= kGeomEps) continue;
    for (std::size_t j = 1; j < b.size(); ++j) {
      const Segment sb{b[j - 1], b[j]};
      if (sb.length() <= kGeomEps) continue;
      if (auto p = segment_crossing(sa, sb); p && point_in_polygon(region, *p)) return true;
    }
  }
  return false;
}

MainBehavior base_maneuver(double heading_deg, const ClassifierConfig& cfg) {
  const double mag = std::abs(heading_deg);
  if (mag < cfg.straight_max_deg) return MainBehavior::STR;
  if (mag >= cfg.uturn_min_deg) return MainBehavior::UT;
  return heading_deg > 0.0 ? MainBehavior::LFT : MainBehavior::RT;
}

std::optional<SubBehavior> combine(MainBehavior event, MainBehavior base) {
  using S = SubBehavior;
  switch (event) {
    case MainBehavior::IPC:
      if (base == MainBehavior::LFT) return S::IPC_LFT;
      if (base == MainBehavior::RT) return S::IPC_RT;
      if (base == MainBehavior::STR) return S::IPC_STR;
      return std::nullopt;
    case MainBehavior::COV:
      if (base == MainBehavior::LFT) return S::COV_LFT;
      if (base == MainBehavior::RT) return S::COV_RT;
      if (base == MainBehavior::STR) return S::COV_STR;
      return std::nullopt;
    case MainBehavior::YLW:
      if (base == MainBehavior::LFT) return S::YLW_LFT;
      if (base == MainBehavior::STR) return S::YLW_STR;
      return std::nullopt;
    default: return std::nullopt;
  }
}

}  // namespace

bool is_motor_vehicle(AgentCategory c) {
  return c != AgentCategory::pedestrian && c != AgentCategory::cyclist;
}

json classifier_to_json(const ClassifierConfig& c) {
  return {{"straight_max_deg", c.straight_max_deg}, {"uturn_min_deg", c.uturn_min_deg},
          {"stop_speed", c.stop_speed},             {"stop_dwell_s", c.stop_dwell_s},
          {"stop_zone_m", c.stop_zone_m},           {"ipc_distance", c.ipc_distance},
          {"ipc_min_speed", c.ipc_min_speed},       {"cov_distance", c.cov_distance},
          {"uturn_start_deg", c.uturn_start_deg},   {"uturn_end_deg", c.uturn_end_deg}};
}

ClassifierConfig classifier_from_json(const json& j) {
  ClassifierConfig c;
  const std::pair<const char*, double*> fields[] = {
      {"straight_max_deg", &c.straight_max_deg}, {"uturn_min_deg", &c.uturn_min_deg},
      {"stop_speed", &c.stop_speed},             {"stop_dwell_s", &c.stop_dwell_s},
      {"stop_zone_m", &c.stop_zone_m},           {"ipc_distance", &c.ipc_distance},
      {"ipc_min_speed", &c.ipc_min_speed},       {"cov_distance", &c.cov_distance},
      {"uturn_start_deg", &c.uturn_start_deg},   {"uturn_end_deg", &c.uturn_end_deg}};
  if (!j.is_object()) throw ParseError("classifier: expected object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto f = std::find_if(std::begin(fields), std::end(fields), [&](const auto& p) { return it.key() == p.first; });
    if (f == std::end(fields)) throw ParseError("classifier: unknown key '" + it.key() + "'");
    *f->second = detail::as_number(*it, "classifier." + it.key());
  }
  if (!(c.straight_max_deg > 0.0 && c.straight_max_deg < c.uturn_min_deg))
    throw InvariantError("classifier", "turn thresholds must satisfy 0 < straight < uturn");
  return c;
}

BehaviorEvidence behavior_evidence(const Scenario& s, const HDMapModel& m, const ClassifierConfig& cfg) {
  BehaviorEvidence ev;
  const AgentTrack& ego = s.ego_track();
  const auto& smp = ego.samples;
  const auto heading = cumulative_heading_deg(ego);
  ev.heading_change_deg = heading.back();

  std::vector<int> upstream;
  for (const auto& g : s.signals)
    upstream.push_back(stop_line_upstream_side(m, g.stop_line, g.group_id, g.controlled_lane_ids));

  const int dwell_ticks = static_cast<int>(std::lround(cfg.stop_dwell_s * kTickHz));
  int run = 0;
  for (std::size_t i = 0; i < smp.size(); ++i) {
    const Vec2 p = smp[i].pose.position();
    bool waiting = smp[i].speed < cfg.stop_speed;
    if (waiting) {
      waiting = false;
      for (std::size_t g = 0; g < s.signals.size() && !waiting; ++g) {
        const auto& grp = s.signals[g];
        waiting = upstream[g] != 0 && signal_state_at(grp, smp[i].tick) == SignalState::red &&
                  signed_side(grp.stop_line, p) == upstream[g] &&
                  point_segment_distance(p, grp.stop_line) <= cfg.stop_zone_m;
      }
    }
    const bool contiguous = i > 0 && smp[i].tick == smp[i - 1].tick + 1;
    run = waiting ? (contiguous ? run + 1 : 1) : 0;
    ev.stopped_at_red = ev.stopped_at_red || run >= dwell_ticks;
  }

  for (std::size_t i = 1; i < smp.size() && !ev.crossed_on_yellow; ++i) {
    for (std::size_t g = 0; g < s.signals.size(); ++g) {
      if (signal_state_at(s.signals[g], smp[i].tick) != SignalState::yellow) continue;
      if (crosses_stop_line(s.signals[g].stop_line, upstream[g], smp[i - 1].pose.position(), smp[i].pose.position())) {
        ev.crossed_on_yellow = true;
        break;
      }
    }
  }

  const Polyline ego_path = ego.path();
  const Polygon region = intersection_region(m);
  for (const auto& track : s.tracks) {
    if (track.track_id == ego.track_id) continue;
    const bool vulnerable = !is_motor_vehicle(track.category);
    if (vulnerable && ev.near_vulnerable) continue;
    if (!vulnerable && ev.competing_vehicle) continue;
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& es : smp) {
      if (vulnerable && es.speed <= cfg.ipc_min_speed) continue;
      const auto st = track_state_at_tick(track, es.tick);
      if (!st) continue;
      closest = std::min(closest, obb_distance(ego.box_at(es.pose), track.box_at(st->pose)));
    }
    if (vulnerable) {
      ev.near_vulnerable = closest < cfg.ipc_distance;
    } else if (closest < cfg.cov_distance) {
      ev.competing_vehicle = paths_cross_inside(ego_path, track.path(), region);
    }
  }

  if (base_maneuver(ev.heading_change_deg, cfg) == MainBehavior::UT) {
    std::size_t start = 0;
    while (start < smp.size() && std::abs(heading[start]) <= cfg.uturn_start_deg) ++start;
    if (start < smp.size()) ev.abnormal_uturn = lane_clearance(m, smp[start].pose.position()) > 0.0;
    for (std::size_t i = std::max<std::size_t>(start, 1); i < smp.size() && !ev.abnormal_uturn; ++i) {
      const double a = std::abs(heading[i - 1]), b = std::abs(heading[i]);
      if (std::max(a, b) < cfg.uturn_start_deg || std::min(a, b) > cfg.uturn_end_deg) continue;
      for (const auto& sl : m.stop_lines) {
        if (crosses_stop_line(sl.segment, 0, smp[i - 1].pose.position(), smp[i].pose.position())) {
          ev.abnormal_uturn = true;
          break;
        }
      }
    }
  }
  return ev;
}

BehaviorLabel label_from_evidence(const BehaviorEvidence& ev, const ClassifierConfig& cfg) {
  const MainBehavior base = base_maneuver(ev.heading_change_deg, cfg);
  if (ev.near_vulnerable)
    if (auto sub = combine(MainBehavior::IPC, base)) return BehaviorLabel::from_sub(*sub);
  if (ev.competing_vehicle)
    if (auto sub = combine(MainBehavior::COV, base)) return BehaviorLabel::from_sub(*sub);
  if (ev.crossed_on_yellow)
    if (auto sub = combine(MainBehavior::YLW, base)) return BehaviorLabel::from_sub(*sub);
  if (base == MainBehavior::UT) return BehaviorLabel::from_sub(ev.abnormal_uturn ? SubBehavior::UT_AN : SubBehavior::UT_N);
  if (ev.stopped_at_red) return BehaviorLabel::from_sub(SubBehavior::STP);
  switch (base) {
    case MainBehavior::LFT: return BehaviorLabel::from_sub(SubBehavior::LFT);
    case MainBehavior::RT: return BehaviorLabel::from_sub(SubBehavior::RT);
    default: return BehaviorLabel::from_sub(SubBehavior::STR);
  }
}

BehaviorLabel classify_behavior(const Scenario& s, const HDMapModel& m, const ClassifierConfig& cfg) {
  return label_from_evidence(behavior_evidence(s, m, cfg), cfg);
}

Scenario with_ego(const Scenario& s, const std::string& track_id) {
  const AgentTrack* t = s.find_track(track_id);
  if (!t) throw ArgumentError("with_ego: unknown track '" + track_id + "'");
  Scenario out = s;
  out.ego = make_ego_assignment(*t);
  out.behavior.reset();
  return out;
}

std::string select_ego(const Scenario& s, const HDMapModel& m, const std::map<BehaviorLabel, std::size_t>& counts,
                       const EgoSelectionConfig& cfg, const ClassifierConfig& ccfg) {
  std::vector<const AgentTrack*> eligible;
  for (const auto& t : s.tracks) {
    if (t.category != AgentCategory::car || t.first_tick() != 0 || t.last_tick() != s.n_ticks - 1) continue;
    if (polyline_length(t.path()) < cfg.min_route_m) continue;
    if (quality_score(t, m, s.signals).total < cfg.min_quality) continue;
    eligible.push_back(&t);
  }
  if (eligible.empty()) throw ArgumentError("select_ego: no eligible candidate in '" + s.scenario_id + "'");
  std::sort(eligible.begin(), eligible.end(),
            [](const AgentTrack* a, const AgentTrack* b) { return a->track_id < b->track_id; });

  const AgentTrack* best = nullptr;
  std::size_t best_count = std::numeric_limits<std::size_t>::max();
  for (const AgentTrack* t : eligible) {
    const BehaviorLabel label = classify_behavior(with_ego(s, t->track_id), m, ccfg);
    auto it = counts.find(label);
    const std::size_t c = it == counts.end() ? 0 : it->second;
    if (c < best_count) {
      best = t;
      best_count = c;
    }
  }
  return best->track_id;
}

}  // namespace twinbench
