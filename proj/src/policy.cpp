#include "twinbench/policy.hpp"

#include <algorithm>

namespace twinbench {

namespace {

class ExpertReplay final : public Policy {
 public:
  explicit ExpertReplay(AgentTrack track) : track_(std::move(track)) {}

  std::string name() const override { return "expert"; }
  PolicyMode mode() const override { return PolicyMode::waypoints; }

  PolicyOutput act(const Observation& obs) override {
    WaypointPlan plan;
    const int last = track_.last_tick();
    for (int k = 1; k <= kPlanHorizon; ++k) {
      const int tick = std::clamp(obs.tick + k, track_.first_tick(), last);
      plan.points.push_back(track_state_at_tick(track_, tick)->pose.position());
    }
    return plan;
  }

 private:
  AgentTrack track_;
};

class PidFollower final : public Policy {
 public:
  explicit PidFollower(double v) : v_target_(v) {}

  std::string name() const override { return "pid-follower"; }
  PolicyMode mode() const override { return PolicyMode::waypoints; }
  PolicyOutput act(const Observation& obs) override { return follow_route_plan(obs, v_target_); }

 private:
  double v_target_;
};

class ConstantVelocity final : public Policy {
 public:
  std::string name() const override { return "constant-velocity"; }
  PolicyMode mode() const override { return PolicyMode::waypoints; }
  PolicyOutput act(const Observation& obs) override { return constant_velocity_plan(obs); }
};

class Stationary final : public Policy {
 public:
  std::string name() const override { return "stationary"; }
  PolicyMode mode() const override { return PolicyMode::waypoints; }
  PolicyOutput act(const Observation& obs) override {
    return WaypointPlan{Polyline(kPlanHorizon, obs.ego.pose.position())};
  }
};

class FullBrake final : public Policy {
 public:
  std::string name() const override { return "full-brake"; }
  PolicyMode mode() const override { return PolicyMode::control; }
  PolicyOutput act(const Observation&) override { return ControlCommand{0.0, 0.0, 1.0}; }
};

}  // namespace

WaypointPlan follow_route_plan(const Observation& obs, double v_target, double dt) {
  WaypointPlan plan;
  const Vec2 ego = obs.ego.pose.position();
  if (obs.route_remaining.empty()) {
    plan.points.assign(kPlanHorizon, ego);
    return plan;
  }
  const double s0 = project_onto_polyline(obs.route_remaining, ego).s;
  for (int k = 1; k <= kPlanHorizon; ++k)
    plan.points.push_back(point_at_arclength(obs.route_remaining, s0 + v_target * dt * k));
  return plan;
}

WaypointPlan constant_velocity_plan(const Observation& obs, double dt) {
  WaypointPlan plan;
  const Vec2 origin = obs.ego.pose.position();
  const Vec2 dir = unit_from_angle(obs.ego.pose.heading);
  for (int k = 1; k <= kPlanHorizon; ++k) plan.points.push_back(origin + dir * (obs.ego.speed * dt * k));
  return plan;
}

PolicyHandle builtin_expert_replay(const Scenario& s) { return std::make_unique<ExpertReplay>(s.ego_track()); }

PolicyHandle builtin_pid_follower(double v_target, double max_speed) {
  if (!(v_target > 0.0 && v_target <= max_speed))
    throw ArgumentError("pid-follower: v_target must lie in (0, v_max]");
  return std::make_unique<PidFollower>(v_target);
}

PolicyHandle builtin_constant_velocity() { return std::make_unique<ConstantVelocity>(); }
PolicyHandle builtin_stationary() { return std::make_unique<Stationary>(); }
PolicyHandle builtin_full_brake() { return std::make_unique<FullBrake>(); }

}  // namespace twinbench
