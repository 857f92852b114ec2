#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "twinbench/errors.hpp"
#include "twinbench/vehicle.hpp"

using namespace twinbench;

namespace {

double hold_throttle(double v, const VehicleParams& p) { return p.drag * v * v / p.max_accel; }

}  // namespace

TEST(Integrator, RestIsAFixedPoint) {
  const EgoState s{{1, 2, 0.3}, 0.0, 0.0, 0.0};
  const EgoState next = integrate_ego(s, {}, 0.1, VehicleParams{});
  EXPECT_EQ(next.pose, s.pose);
  EXPECT_EQ(next.speed, 0.0);
}

TEST(Integrator, StraightLineAtConstantSpeed) {
  const VehicleParams p;
  const EgoState s{{0, 0, 0}, 10.0, 0.0, 0.0};
  const EgoState next = integrate_ego(s, {0.0, hold_throttle(10.0, p), 0.0}, 0.1, p);
  EXPECT_NEAR(next.pose.x, 1.0, 1e-12);
  EXPECT_NEAR(next.pose.y, 0.0, 1e-12);
  EXPECT_NEAR(next.speed, 10.0, 1e-12);
}

TEST(Integrator, ConstantSteerCircleRadius) {
  const VehicleParams p;
  const double delta = 0.1, v = 5.0;
  EgoState s{{0, 0, 0}, v, delta, 0.0};
  std::vector<Vec2> pts{{0, 0}};
  for (int i = 0; i < 100; ++i) {
    s = integrate_ego(s, {delta / p.max_steer, hold_throttle(v, p), 0.0}, 0.1, p);
    pts.push_back(s.pose.position());
  }
  const auto ref = oracle::bicycle_reference(v, delta, p.wheelbase, 10.0, 1e-4);
  const double r = oracle::circumradius(pts[0], pts[50], pts[100]);
  const double r_ref = oracle::circumradius(ref[0], ref[ref.size() / 2], ref.back());
  const double r_closed = p.wheelbase / std::tan(delta);
  EXPECT_NEAR(r / r_ref, 1.0, 0.01);
  EXPECT_NEAR(r / r_closed, 1.0, 0.01);
}

TEST(Integrator, FullBrakeStopsWithinBound) {
  const VehicleParams p;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> speed(0.0, p.max_speed), ang(-kPi, kPi);
  for (int k = 0; k < 100; ++k) {
    EgoState s{{0, 0, ang(rng)}, speed(rng), 0.0, 0.0};
    const double v0 = s.speed;
    const int bound = static_cast<int>(std::ceil(v0 / p.max_brake / 0.1));
    double travelled = 0.0;
    for (int i = 0; i < bound; ++i) {
      const EgoState n = integrate_ego(s, {0.0, 0.0, 1.0}, 0.1, p);
      travelled += distance(n.pose.position(), s.pose.position());
      s = n;
    }
    EXPECT_EQ(s.speed, 0.0);
    EXPECT_LE(travelled, v0 * v0 / (2 * p.max_brake) + 1e-9);
  }
}

TEST(Integrator, SpeedAndSteerLimits) {
  const VehicleParams p;
  EgoState s{{0, 0, 0}, p.max_speed, 0.0, 0.0};
  s = integrate_ego(s, {1.0, 1.0, 0.0}, 0.1, p);
  EXPECT_LE(s.speed, p.max_speed);
  EXPECT_NEAR(s.steering_angle, p.max_steer_rate * 0.1, 1e-12);
}

TEST(Command, ClampsAndSanitizes) {
  const ControlCommand c(2.0, -1.0, std::nan(""));
  EXPECT_EQ(c.steer(), 1.0);
  EXPECT_EQ(c.throttle(), 0.0);
  EXPECT_EQ(c.brake(), 0.0);
}

TEST(Controller, DeadAheadHoldsSpeed) {
  const VehicleParams p;
  const EgoState s{{0, 0, 0}, 8.0, 0.0, 0.0};
  const Polyline path{{5, 0}, {10, 0}, {20, 0}};
  const ControlCommand c = waypoints_to_control(s, path, 8.0, p);
  EXPECT_NEAR(c.steer(), 0.0, 1e-12);
  EXPECT_NEAR(c.throttle(), hold_throttle(8.0, p), 1e-12);
  EXPECT_EQ(c.brake(), 0.0);
}

TEST(Controller, LeftTargetSteersLeft) {
  const EgoState s{{0, 0, 0}, 5.0, 0.0, 0.0};
  const double ld = lookahead_distance(5.0, TrackingParams{});
  const Polyline path{{0, ld}};
  EXPECT_GT(waypoints_to_control(s, path, 5.0).steer(), 0.0);
}

TEST(Controller, OverspeedBrakes) {
  const EgoState s{{0, 0, 0}, 13.0, 0.0, 0.0};
  const Polyline path{{10, 0}, {20, 0}};
  const ControlCommand c = waypoints_to_control(s, path, 8.0);
  EXPECT_GT(c.brake(), 0.0);
  EXPECT_EQ(c.throttle(), 0.0);
}

TEST(Controller, PlanSpeedFromTimeIndexedPoints) {
  const EgoState s{{0, 0, 0}, 0.0, 0.0, 0.0};
  Polyline plan;
  for (int k = 1; k <= 20; ++k) plan.push_back({0.6 * k, 0.0});
  EXPECT_NEAR(plan_target_speed(s, plan, 0.1, TrackingParams{}), 6.0, 1e-9);
}

TEST(Controller, TracksStraightPlan) {
  const VehicleParams p;
  WaypointController ctl(p, TrackingParams{}, 0.1);
  EgoState s{{0, 0.5, 0}, 5.0, 0.0, 0.0};
  for (int t = 0; t < 200; ++t) {
    Polyline plan;
    for (int k = 1; k <= 20; ++k) plan.push_back({s.pose.x + 0.7 * k, 0.0});
    s = integrate_ego(s, ctl.follow_plan(s, plan), 0.1, p);
  }
  EXPECT_NEAR(s.pose.y, 0.0, 0.05);
  EXPECT_NEAR(s.speed, 7.0, 0.1);
}

TEST(VehicleJson, RoundTripAndRejects) {
  VehicleParams p;
  p.wheelbase = 3.1;
  const VehicleParams q = vehicle_from_json(vehicle_to_json(p));
  EXPECT_EQ(q.wheelbase, 3.1);
  EXPECT_THROW(vehicle_from_json({{"wheelbase", -1.0}}), InvariantError);
  EXPECT_THROW(vehicle_from_json({{"mass", 1.0}}), ParseError);
}
