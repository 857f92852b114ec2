#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "twinbench/errors.hpp"
#include "twinbench/metrics.hpp"

using namespace twinbench;

namespace {

EpisodeResult episode(const std::string& id, double rc, std::vector<InfractionKind> kinds = {},
                      Termination term = Termination::completed) {
  const PenaltyTable table;
  EpisodeResult r;
  r.scenario_id = id;
  r.rc = rc;
  r.termination = term;
  int tick = 0;
  for (auto k : kinds) r.infractions.push_back({k, tick++, table[k], is_collision(k)});
  r.success = episode_succeeded(r);
  return r;
}

}  // namespace

TEST(DrivingScore, HandEvaluatedExamples) {
  const PenaltyTable t;
  const std::vector<EpisodeResult> one{episode("a", 1.0)};
  EXPECT_NEAR(driving_score(one, t), 100.0, 1e-9);
  const std::vector<EpisodeResult> red{episode("a", 0.8, {InfractionKind::red_light})};
  EXPECT_NEAR(driving_score(red, t), 56.0, 1e-9);
  const std::vector<EpisodeResult> two{
      episode("a", 1.0), episode("b", 0.5, {InfractionKind::collision_vehicle, InfractionKind::red_light})};
  EXPECT_NEAR(driving_score(two, t), 60.5, 1e-9);
}

TEST(DrivingScore, DecomposesIntoEpisodeScores) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  const PenaltyTable t;
  std::vector<EpisodeResult> rs;
  double sum = 0;
  for (int i = 0; i < 50; ++i) {
    std::vector<InfractionKind> kinds;
    for (auto k : kAllInfractionKinds)
      if (u(rng) < 0.15) kinds.push_back(k);
    rs.push_back(episode("e" + std::to_string(i), u(rng), kinds));
    sum += rs.back().score();
  }
  EXPECT_NEAR(driving_score(rs, t), 100.0 * sum / 50, 1e-12);
}

TEST(DrivingScore, MonotoneUnderAddedPenalties) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  const PenaltyTable t;
  const std::vector<InfractionKind> penalized{InfractionKind::collision_pedestrian, InfractionKind::collision_vehicle,
                                              InfractionKind::collision_static, InfractionKind::red_light,
                                              InfractionKind::off_road};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EpisodeResult> rs;
    std::vector<double> rc;
    std::vector<std::vector<double>> pens;
    for (int i = 0; i < 5; ++i) {
      rs.push_back(episode("e" + std::to_string(i), u(rng)));
      rc.push_back(rs.back().rc);
      pens.emplace_back();
    }
    const double before = driving_score(rs, t);
    EXPECT_NEAR(before, oracle::eq1(rc, pens), 1e-9);
    const auto k = penalized[rng() % penalized.size()];
    const std::size_t j = rng() % rs.size();
    rs[j].infractions.push_back({k, 0, t[k], false});
    pens[j].push_back(t[k]);
    const double after = driving_score(rs, t);
    EXPECT_LE(after, before);
    EXPECT_NEAR(after, oracle::eq1(rc, pens), 1e-9);
    EXPECT_GE(after, 0.0);
  }
}

TEST(SuccessRate, CountsAndThreshold) {
  std::vector<EpisodeResult> rs{episode("a", 1.0), episode("b", 1.0, {InfractionKind::red_light}),
                                episode("c", 0.5), episode("d", 1.0, {}, Termination::timeout)};
  EXPECT_DOUBLE_EQ(success_rate(rs), 25.0);
  EXPECT_DOUBLE_EQ(success_rate(std::vector<EpisodeResult>{episode("a", 1.0), episode("b", 0.96)}), 100.0);
  EXPECT_THROW(success_rate(std::vector<EpisodeResult>{}), ArgumentError);
}

TEST(SuccessRate, NeverAboveCompletionShare) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EpisodeResult> rs;
    int completed = 0;
    for (int i = 0; i < 10; ++i) {
      rs.push_back(episode("e" + std::to_string(i), u(rng) < 0.5 ? 1.0 : u(rng),
                           u(rng) < 0.3 ? std::vector{InfractionKind::red_light} : std::vector<InfractionKind>{}));
      completed += rs.back().rc >= 0.95;
    }
    EXPECT_LE(success_rate(rs), 10.0 * completed + 1e-12);
  }
}

TEST(RouteCompletion, ArcLengthCases) {
  const Polyline route{{0, 0}, {100, 0}};
  EXPECT_DOUBLE_EQ(route_completion(route, route), 1.0);
  const std::vector<Vec2> half{{0, 0}, {25, 0.5}, {50, -0.3}};
  EXPECT_NEAR(route_completion(half, route), 0.5, 1e-12);
  const std::vector<Vec2> start{{0, 0}};
  EXPECT_EQ(route_completion(start, route), 0.0);
  const std::vector<Vec2> shortcut{{0, 0}, {90, 20}};
  EXPECT_EQ(route_completion(shortcut, route), 0.0);
}

TEST(Penalties, DefaultsAndValidation) {
  const PenaltyTable t;
  EXPECT_EQ(t[InfractionKind::collision_pedestrian], 0.50);
  EXPECT_EQ(t[InfractionKind::collision_vehicle], 0.60);
  EXPECT_EQ(t[InfractionKind::collision_static], 0.65);
  EXPECT_EQ(t[InfractionKind::red_light], 0.70);
  EXPECT_EQ(t[InfractionKind::timeout], 1.0);
  PenaltyTable u;
  EXPECT_THROW(u.set(InfractionKind::red_light, 0.0), InvariantError);
  EXPECT_THROW(u.set(InfractionKind::timeout, 0.5), InvariantError);
  const PenaltyTable back = PenaltyTable::from_json(t.to_json());
  for (auto k : kAllInfractionKinds) EXPECT_EQ(back[k], t[k]);
}

TEST(Summary, GroupsPartitionTheTotal) {
  std::vector<EpisodeResult> rs{episode("a", 1.0), episode("b", 1.0), episode("c", 1.0), episode("d", 0.1)};
  std::map<std::string, ScenarioConditions> cond{{"a", {"STR", "sunny", "noon"}},
                                                 {"b", {"STR", "rain", "noon"}},
                                                 {"c", {"STR", "rain", "night"}},
                                                 {"d", {"LFT", "sunny", "night"}}};
  const auto s = summarize(rs, cond, PenaltyTable{});
  EXPECT_EQ(s.n_total, 4u);
  EXPECT_DOUBLE_EQ(s.sr, 75.0);
  EXPECT_DOUBLE_EQ(s.per_behavior.at("STR").sr, 100.0);
  EXPECT_DOUBLE_EQ(s.per_behavior.at("LFT").sr, 0.0);
  std::size_t n = 0;
  for (const auto& [k, g] : s.per_weather) n += g.n;
  EXPECT_EQ(n, 4u);
  cond.erase("d");
  EXPECT_THROW(summarize(rs, cond, PenaltyTable{}), ArgumentError);
}

TEST(Summary, SingleGroupEqualsOverall) {
  std::vector<EpisodeResult> rs{episode("a", 1.0), episode("b", 0.4, {InfractionKind::off_road})};
  std::map<std::string, ScenarioConditions> cond{{"a", {"UT", "fog", "evening"}}, {"b", {"UT", "fog", "evening"}}};
  const auto s = summarize(rs, cond, PenaltyTable{});
  EXPECT_EQ(s.per_behavior.at("UT"), (GroupStats{2, s.sr, s.ds}));
}

TEST(ResultJson, RoundTrip) {
  const EpisodeResult r = episode("x", 0.75, {InfractionKind::collision_pedestrian}, Termination::collision);
  EXPECT_EQ(result_from_json(result_to_json(r)), r);
  auto j = result_to_json(r);
  j["termination"] = "crashed";
  EXPECT_THROW(result_from_json(j), ParseError);
}
