#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "twinbench/errors.hpp"
#include "twinbench/generator.hpp"

using namespace twinbench;

namespace {

Scenario sample_scenario() {
  GeneratorSpec g;
  g.behavior = SubBehavior::COV_LFT;
  g.seed = 4;
  g.n_background = 2;
  return generate_synthetic(g).first;
}

template <class F>
std::string invariant_field(const Scenario& base, F&& mutate) {
  auto doc = scenario_to_json(base);
  mutate(doc);
  try {
    scenario_from_json(doc);
  } catch (const InvariantError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(ScenarioIo, RoundTripIsExact) {
  const Scenario s = sample_scenario();
  const std::string text = serialize_scenario(s);
  const Scenario back = load_scenario(text);
  EXPECT_EQ(back, s);
  EXPECT_EQ(serialize_scenario(back), text);
}

TEST(ScenarioIo, RejectsMalformedDocuments) {
  const Scenario s = sample_scenario();
  EXPECT_THROW(load_scenario("{not json"), ParseError);
  auto doc = scenario_to_json(s);
  doc["extra"] = 1;
  EXPECT_THROW(scenario_from_json(doc), ParseError);
  doc = scenario_to_json(s);
  doc.erase("tracks");
  EXPECT_THROW(scenario_from_json(doc), ParseError);
  doc = scenario_to_json(s);
  doc["weather"] = "hail";
  EXPECT_THROW(scenario_from_json(doc), ParseError);
  doc = scenario_to_json(s);
  doc["tracks"][0]["samples"][0] = {0, 1.0, 2.0};
  EXPECT_THROW(scenario_from_json(doc), ParseError);
}

TEST(ScenarioIo, InvariantsNameTheirField) {
  const Scenario s = sample_scenario();
  EXPECT_EQ(invariant_field(s, [](auto& d) { d["tick_hz"] = 20; }), "tick_hz");
  EXPECT_EQ(invariant_field(s, [](auto& d) { d["ego"]["agent_id"] = "ghost"; }), "EgoAssignment");
  EXPECT_EQ(invariant_field(s, [](auto& d) { d["scenario_id"] = ""; }), "scenario_id");
  EXPECT_EQ(invariant_field(s, [](auto& d) { d["behavior"]["main"] = "STR"; }), "behavior");
  EXPECT_NE(invariant_field(s, [](auto& d) { d["tracks"][1]["track_id"] = d["tracks"][0]["track_id"]; }), "");
  EXPECT_NE(invariant_field(s, [](auto& d) { d["tracks"][0]["samples"][3][4] = -1.0; }), "");
  EXPECT_NE(invariant_field(s, [](auto& d) { d["tracks"][0]["samples"][3][1] = 500.0; }), "");
  EXPECT_NE(invariant_field(s, [](auto& d) { d["tracks"][0]["samples"][2][0] = 1; }), "");
  EXPECT_EQ(invariant_field(s, [](auto& d) { d["ego"]["source"] = {900.0, 900.0, 0.0}; }), "EgoAssignment.source");
  EXPECT_EQ(invariant_field(s, [](auto& d) { d["ego"]["route_waypoints"] = {{0.0, 0.0}}; }),
            "EgoAssignment.route_waypoints");
}

TEST(Interpolation, ExactAtSamplesLinearBetween) {
  AgentTrack t;
  t.track_id = "t";
  t.samples = {{0, {0, 0, 0}, 0.0}, {2, {2, 0, kPi}, 2.0}};
  const TrackState mid = sample_track_pose(t, 0.1);
  EXPECT_NEAR(mid.pose.x, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(mid.pose.heading), kPi / 2, 1e-12);
  EXPECT_NEAR(mid.speed, 1.0, 1e-12);
  EXPECT_EQ(sample_track_pose(t, 0.2).pose, (Pose2{2, 0, kPi}));
  EXPECT_THROW(sample_track_pose(t, 0.3), ArgumentError);
  EXPECT_FALSE(track_state_at_tick(t, 3));
}

TEST(Interpolation, HeadingTakesShortArc) {
  AgentTrack t;
  t.track_id = "t";
  t.samples = {{0, {0, 0, 170 * kPi / 180}, 1.0}, {1, {0.1, 0, -170 * kPi / 180}, 1.0}};
  const double h = sample_track_pose(t, 0.05).pose.heading;
  EXPECT_NEAR(std::abs(h), kPi, 1e-9);
}

TEST(EgoAssignment, RouteSpacingAndEndpoints) {
  const auto track = fixtures::straight_track("e", AgentCategory::car, {0, 0}, 0.0, 7.0, 0, 100);
  const EgoAssignment a = make_ego_assignment(track);
  EXPECT_EQ(a.agent_id, "e");
  EXPECT_EQ(a.source, track.samples.front().pose);
  EXPECT_EQ(a.destination, track.samples.back().pose);
  EXPECT_EQ(a.route_waypoints.front(), track.samples.front().pose.position());
  EXPECT_EQ(a.route_waypoints.back(), track.samples.back().pose.position());
  for (std::size_t i = 1; i < a.route_waypoints.size(); ++i) {
    const double d = distance(a.route_waypoints[i - 1], a.route_waypoints[i]);
    EXPECT_GE(d, 1.0);
    EXPECT_LE(d, 10.0);
  }
}

TEST(Stats, CountsAndFractions) {
  const Corpus c = canonical_suite(1);
  const auto r = scenario_stats(c.scenarios);
  EXPECT_EQ(r.n_scenarios, 14u);
  EXPECT_EQ(r.behavior_counts.at("IPC"), 3u);
  EXPECT_EQ(r.behavior_counts.at("UT"), 2u);
  double sum = 0;
  for (const auto& [k, f] : DistributionReport::fractions(r.behavior_counts)) sum += f;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(DistributionReport::fractions(r.behavior_counts).at("YLW"), 2.0 / 14.0, 1e-12);
  const auto j = stats_to_json(r);
  EXPECT_EQ(j["behavior"]["counts"]["COV"], 3);
  EXPECT_THROW(scenario_stats(std::vector<Scenario>{}), ArgumentError);
}

TEST(Validate, MapCrossChecks) {
  const Corpus c = canonical_suite(1);
  Scenario s = c.scenarios.front();
  EXPECT_TRUE(validate_scenario(s, c.map).empty());
  s.ego.route_waypoints.push_back({400, 400});
  ASSERT_FALSE(s.signals.empty());
  s.signals[0].controlled_lane_ids.push_back("no-such-lane");
  std::set<std::string> codes;
  for (const auto& v : validate_scenario(s, c.map)) codes.insert(v.code);
  EXPECT_TRUE(codes.count("route-off-drivable"));
  EXPECT_TRUE(codes.count("dangling-lane-ref"));
}

TEST(MapIo, RoundTripAndChecks) {
  const HDMapModel m = make_intersection_map();
  EXPECT_EQ(serialize_map(load_map(serialize_map(m))), serialize_map(m));
  auto doc = map_to_json(m);
  doc["lanes"][0]["centerline"] = {{1.0, 1.0}};
  EXPECT_THROW(map_from_json(doc), InvariantError);
  doc = map_to_json(m);
  doc["drivable_area"][0] = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  EXPECT_THROW(map_from_json(doc), InvariantError);
  doc = map_to_json(m);
  doc["lanes"][1]["lane_id"] = doc["lanes"][0]["lane_id"];
  EXPECT_THROW(map_from_json(doc), InvariantError);
}

TEST(MapQueries, DrivableAndIntersection) {
  const HDMapModel m = make_intersection_map();
  EXPECT_TRUE(point_in_drivable(m, {0, 0}));
  EXPECT_TRUE(point_in_drivable(m, {3.75, -40}));
  EXPECT_FALSE(point_in_drivable(m, {30, -30}));
  const Polygon box = intersection_region(m);
  EXPECT_TRUE(point_in_polygon(box, {0, 0}));
  EXPECT_FALSE(point_in_polygon(box, {3.75, -40}));
}

TEST(MapQueries, StopLineUpstreamSide) {
  const HDMapModel m = make_intersection_map();
  const Corpus c = canonical_suite(1);
  for (const auto& g : c.scenarios.front().signals) {
    const int up = stop_line_upstream_side(m, g.stop_line, g.group_id, g.controlled_lane_ids);
    EXPECT_NE(up, 0) << g.group_id;
    const Vec2 mid = (g.stop_line.a + g.stop_line.b) * 0.5;
    const Vec2 dir = (g.stop_line.b - g.stop_line.a) * (1.0 / g.stop_line.length());
    const Vec2 left{-dir.y, dir.x};
    const Vec2 upstream_pt = mid + left * (2.0 * up);
    const Vec2 downstream_pt = mid - left * (2.0 * up);
    EXPECT_TRUE(crosses_stop_line(g.stop_line, up, upstream_pt, downstream_pt));
    EXPECT_FALSE(crosses_stop_line(g.stop_line, up, downstream_pt, upstream_pt));
  }
}
