#include "twinbench/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace twinbench {

using detail::json;

json vehicle_to_json(const VehicleParams& p) {
  return {{"wheelbase", p.wheelbase},   {"max_steer", p.max_steer}, {"max_steer_rate", p.max_steer_rate},
          {"max_accel", p.max_accel},   {"max_brake", p.max_brake}, {"max_speed", p.max_speed},
          {"drag", p.drag},             {"substeps", p.substeps}};
}

VehicleParams vehicle_from_json(const json& j) {
  detail::reject_unknown_keys(
      j, {"wheelbase", "max_steer", "max_steer_rate", "max_accel", "max_brake", "max_speed", "drag", "substeps"},
      "vehicle");
  VehicleParams p;
  auto num = [&j](const char* k, double& out) {
    if (auto it = j.find(k); it != j.end()) out = detail::as_number(*it, std::string("vehicle.") + k);
  };
  num("wheelbase", p.wheelbase);
  num("max_steer", p.max_steer);
  num("max_steer_rate", p.max_steer_rate);
  num("max_accel", p.max_accel);
  num("max_brake", p.max_brake);
  num("max_speed", p.max_speed);
  num("drag", p.drag);
  if (auto it = j.find("substeps"); it != j.end()) p.substeps = static_cast<int>(detail::as_integer(*it, "substeps"));
  if (p.wheelbase <= 0 || p.max_steer <= 0 || p.max_steer_rate <= 0 || p.max_accel <= 0 || p.max_brake <= 0 ||
      p.max_speed <= 0 || p.drag < 0 || p.substeps < 1)
    throw InvariantError("vehicle", "parameters must be positive");
  return p;
}

ControlCommand::ControlCommand(double steer, double throttle, double brake)
    : steer_(std::clamp(std::isfinite(steer) ? steer : 0.0, -1.0, 1.0)),
      throttle_(std::clamp(std::isfinite(throttle) ? throttle : 0.0, 0.0, 1.0)),
      brake_(std::clamp(std::isfinite(brake) ? brake : 0.0, 0.0, 1.0)) {}

EgoState integrate_ego(const EgoState& s, const ControlCommand& c, double dt, const VehicleParams& p) {
  EgoState out = s;
  const int n = std::max(1, p.substeps);
  const double h = dt / n;
  const double steer_target = c.steer() * p.max_steer;
  const double max_delta = p.max_steer_rate * h;
  double x = s.pose.x;
  double y = s.pose.y;
  double theta = s.pose.heading;
  double v = s.speed;
  double delta = std::clamp(s.steering_angle, -p.max_steer, p.max_steer);
  for (int i = 0; i < n; ++i) {
    const double a = c.throttle() * p.max_accel - c.brake() * p.max_brake - p.drag * v * v;
    v = std::clamp(v + a * h, 0.0, p.max_speed);
    delta += std::clamp(steer_target - delta, -max_delta, max_delta);
    theta = normalize_angle(theta + (v / p.wheelbase) * std::tan(delta) * h);
    x += v * std::cos(theta) * h;
    y += v * std::sin(theta) * h;
  }
  out.pose = {x, y, theta};
  out.acceleration = (v - s.speed) / dt;
  out.speed = v;
  out.steering_angle = delta;
  return out;
}

json tracking_to_json(const TrackingParams& p) {
  return {{"lookahead_gain", p.lookahead_gain}, {"lookahead_min", p.lookahead_min},
          {"lookahead_max", p.lookahead_max},   {"speed_kp", p.speed_kp},
          {"speed_ki", p.speed_ki},             {"integral_limit", p.integral_limit},
          {"speed_horizon", p.speed_horizon}};
}

TrackingParams tracking_from_json(const json& j) {
  detail::reject_unknown_keys(j,
                              {"lookahead_gain", "lookahead_min", "lookahead_max", "speed_kp", "speed_ki",
                               "integral_limit", "speed_horizon"},
                              "tracking");
  TrackingParams p;
  auto num = [&j](const char* k, double& out) {
    if (auto it = j.find(k); it != j.end()) out = detail::as_number(*it, std::string("tracking.") + k);
  };
  num("lookahead_gain", p.lookahead_gain);
  num("lookahead_min", p.lookahead_min);
  num("lookahead_max", p.lookahead_max);
  num("speed_kp", p.speed_kp);
  num("speed_ki", p.speed_ki);
  num("integral_limit", p.integral_limit);
  if (auto it = j.find("speed_horizon"); it != j.end())
    p.speed_horizon = static_cast<int>(detail::as_integer(*it, "tracking.speed_horizon"));
  return p;
}

double lookahead_distance(double speed, const TrackingParams& tp) {
  return std::clamp(tp.lookahead_gain * speed, tp.lookahead_min, tp.lookahead_max);
}

double pure_pursuit_steer(const EgoState& s, std::span<const Vec2> path, const VehicleParams& p,
                          const TrackingParams& tp) {
  if (path.empty()) return 0.0;
  const Vec2 ego = s.pose.position();
  const double ld = lookahead_distance(s.speed, tp);

  Vec2 target = path.back();
  bool found = false;
  if (distance(ego, path.front()) >= ld) {
    target = path.front();
    found = true;
  }
  for (std::size_t i = 0; !found && i + 1 < path.size(); ++i) {
    const Vec2 a = path[i];
    const Vec2 b = path[i + 1];
    if (distance(ego, b) < ld) continue;
    // Far root of |a + t(b-a) - ego| = ld on this segment.
    const Vec2 d = b - a;
    const Vec2 f = a - ego;
    const double qa = dot(d, d);
    if (qa <= 0.0) continue;
    const double qb = 2.0 * dot(f, d);
    const double qc = dot(f, f) - ld * ld;
    const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
    const double t = std::clamp((-qb + std::sqrt(disc)) / (2.0 * qa), 0.0, 1.0);
    target = a + d * t;
    found = true;
  }

  const Vec2 rel = target - ego;
  const double dist = rel.norm();
  if (dist < 0.05) return 0.0;
  const double alpha = angle_diff(std::atan2(rel.y, rel.x), s.pose.heading);
  const double delta = std::atan2(2.0 * p.wheelbase * std::sin(alpha), dist);
  return std::clamp(delta / p.max_steer, -1.0, 1.0);
}

double plan_target_speed(const EgoState& s, std::span<const Vec2> plan, double dt, const TrackingParams& tp) {
  if (plan.empty()) return 0.0;
  const std::size_t k = std::min<std::size_t>(plan.size() - 1, static_cast<std::size_t>(std::max(0, tp.speed_horizon)));
  double along = dot(plan[0] - s.pose.position(), unit_from_angle(s.pose.heading));
  for (std::size_t i = 0; i < k; ++i) along += distance(plan[i], plan[i + 1]);
  return std::max(0.0, along / (static_cast<double>(k + 1) * dt));
}

namespace {

ControlCommand longitudinal(double steer, double v, double v_target, double integral, const VehicleParams& p,
                            const TrackingParams& tp) {
  const double err = v_target - v;
  const double a_des = tp.speed_kp * err + tp.speed_ki * integral + p.drag * v * v;
  if (a_des >= 0.0) return {steer, a_des / p.max_accel, 0.0};
  return {steer, 0.0, -a_des / p.max_brake};
}

}  // namespace

ControlCommand WaypointController::operator()(const EgoState& s, std::span<const Vec2> waypoints, double v_target) {
  const double steer = pure_pursuit_steer(s, waypoints, vehicle_, tracking_);
  const double err = v_target - s.speed;
  if (v_target < 0.05) {
    integral_ = 0.0;
  } else {
    integral_ = std::clamp(integral_ + err * dt_, -tracking_.integral_limit, tracking_.integral_limit);
  }
  return longitudinal(steer, s.speed, v_target, integral_, vehicle_, tracking_);
}

ControlCommand WaypointController::follow_plan(const EgoState& s, std::span<const Vec2> plan) {
  return (*this)(s, plan, std::min(plan_target_speed(s, plan, dt_, tracking_), vehicle_.max_speed));
}

ControlCommand waypoints_to_control(const EgoState& s, std::span<const Vec2> waypoints, double v_target,
                                    const VehicleParams& p, const TrackingParams& tp) {
  const double steer = pure_pursuit_steer(s, waypoints, p, tp);
  return longitudinal(steer, s.speed, v_target, 0.0, p, tp);
}

}  // namespace twinbench
