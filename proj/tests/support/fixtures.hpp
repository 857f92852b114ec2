#pragma once

// Hand-built scenarios shared by unit and acceptance tests.

#include <cmath>
#include <string>
#include <vector>

#include "twinbench/config.hpp"
#include "twinbench/hd_map.hpp"
#include "twinbench/policy.hpp"
#include "twinbench/replay.hpp"
#include "twinbench/scenario.hpp"

namespace twinbench::fixtures {

inline AgentTrack straight_track(const std::string& id, AgentCategory cat, Vec2 start, double heading, double speed,
                                 int first_tick, int last_tick) {
  AgentTrack t;
  t.track_id = id;
  t.category = cat;
  std::tie(t.length, t.width) = default_dimensions(cat);
  const Vec2 dir = unit_from_angle(heading);
  for (int k = first_tick; k <= last_tick; ++k) {
    const Vec2 p = start + dir * (speed * (k - first_tick) * kTickDt);
    t.samples.push_back({k, {p.x, p.y, heading}, speed});
  }
  return t;
}

inline HDMapModel corridor_map(const std::string& id, Vec2 lo, Vec2 hi, Polyline lane) {
  HDMapModel m;
  m.map_id = id;
  m.lanes.push_back({"lane-0", std::move(lane), 3.5, {}, std::nullopt});
  m.drivable_area.push_back({{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}});
  return m;
}

inline Scenario scenario_with(const std::string& id, const std::string& map_id, std::vector<AgentTrack> tracks) {
  Scenario s;
  s.scenario_id = id;
  s.intersection_id = map_id;
  s.tracks = std::move(tracks);
  s.n_ticks = 0;
  for (const auto& t : s.tracks) s.n_ticks = std::max(s.n_ticks, t.last_tick() + 1);
  s.ego = make_ego_assignment(s.tracks.front());
  return s;
}

/// Ego passes below a parked bus; a car, a pedestrian and a cyclist wait in
/// its shadow, another car stands in plain view.
struct OcclusionFixture {
  HDMapModel map;
  Scenario scenario;
  std::vector<std::string> occluded_vehicles{"car-hidden"};
  std::vector<std::string> occluded_vulnerable{"cyc-hidden", "ped-hidden"};
};

inline OcclusionFixture occlusion_fixture() {
  OcclusionFixture f;
  f.map = corridor_map("occ-map", {-30.0, -20.0}, {30.0, 20.0}, {{-30.0, -3.75}, {30.0, -3.75}});
  std::vector<AgentTrack> tracks;
  tracks.push_back(straight_track("ego", AgentCategory::car, {-8.0, -3.75}, 0.0, 2.0, 0, 80));
  AgentTrack bus = straight_track("bus", AgentCategory::bus, {0.0, 2.25}, 0.0, 0.0, 0, 80);
  bus.length = 12.0;
  bus.width = 2.5;
  tracks.push_back(bus);
  tracks.push_back(straight_track("car-hidden", AgentCategory::car, {0.0, 5.25}, 0.0, 0.0, 0, 80));
  tracks.push_back(straight_track("ped-hidden", AgentCategory::pedestrian, {-3.0, 5.25}, 0.0, 0.0, 0, 80));
  tracks.push_back(straight_track("cyc-hidden", AgentCategory::cyclist, {3.0, 5.25}, 0.0, 0.0, 0, 80));
  tracks.push_back(straight_track("car-visible", AgentCategory::car, {0.0, -10.0}, 0.0, 0.0, 0, 80));
  f.scenario = scenario_with("occlusion", f.map.map_id, std::move(tracks));
  return f;
}

/// A slow expert and a crossing car that only a faster follower meets. The
/// car stays beyond sensing range of the recorded ego throughout.
struct FlipFixture {
  HDMapModel map;
  Scenario scenario;         ///< with the crossing car
  Scenario clear;            ///< without it
  int meet_tick = 0;
  double follower_speed = 10.0;
};

inline FlipFixture flip_fixture() {
  FlipFixture f;
  f.map = corridor_map("flip-map", {-40.0, -85.0}, {40.0, 85.0}, {{3.75, -80.0}, {3.75, 80.0}});
  constexpr double expert_speed = 2.5;
  const int last = static_cast<int>(std::lround(150.0 / (expert_speed * kTickDt)));
  AgentTrack ego = straight_track("ego", AgentCategory::car, {3.75, -75.0}, kPi / 2.0, expert_speed, 0, last);
  f.clear = scenario_with("flip", f.map.map_id, {ego});

  auto follower = builtin_pid_follower(f.follower_speed);
  const auto [res, trace] = run_episode(f.clear, f.map, *follower, EvalConfig{}, 0);
  (void)res;
  constexpr double meet_y = 60.0;
  for (const auto& rec : trace.ticks) {
    if (rec.state.pose.y >= meet_y) {
      f.meet_tick = rec.tick;
      break;
    }
  }
  const Vec2 meet = trace.ticks[static_cast<std::size_t>(f.meet_tick)].state.pose.position();
  constexpr double car_speed = 8.0;
  constexpr int half_window = 30;
  const Vec2 start = meet - Vec2{car_speed * half_window * kTickDt, 0.0};
  AgentTrack car = straight_track("crossing-car", AgentCategory::car, start, 0.0, car_speed,
                                  f.meet_tick - half_window, f.meet_tick + half_window);
  f.scenario = scenario_with("flip", f.map.map_id, {ego, car});
  return f;
}

}  // namespace twinbench::fixtures
