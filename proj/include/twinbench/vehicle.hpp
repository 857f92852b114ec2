#pragma once

#include <span>

#include "json.hpp"
#include "twinbench/geometry.hpp"

namespace twinbench {

/// Kinematic bicycle parameters. Angles in radians.
struct VehicleParams {
  double wheelbase = 2.9;
  double max_steer = 35.0 * kPi / 180.0;
  double max_steer_rate = 60.0 * kPi / 180.0;
  double max_accel = 3.0;
  double max_brake = 8.0;
  double max_speed = 15.0;
  double drag = 0.01;
  int substeps = 4;
};

nlohmann::json vehicle_to_json(const VehicleParams& p);
VehicleParams vehicle_from_json(const nlohmann::json& j);

/// Normalized actuation; components are clamped on construction.
class ControlCommand {
 public:
  ControlCommand() = default;
  ControlCommand(double steer, double throttle, double brake);

  double steer() const { return steer_; }
  double throttle() const { return throttle_; }
  double brake() const { return brake_; }

  bool operator==(const ControlCommand&) const = default;

 private:
  double steer_ = 0.0;
  double throttle_ = 0.0;
  double brake_ = 0.0;
};

struct EgoState {
  Pose2 pose;
  double speed = 0.0;
  double steering_angle = 0.0;
  double acceleration = 0.0;

  bool operator==(const EgoState&) const = default;
};

/// One control period of the kinematic bicycle, split into semi-implicit
/// sub-steps (speed, then steering, then yaw, then position).
EgoState integrate_ego(const EgoState& s, const ControlCommand& c, double dt, const VehicleParams& p);

/// Gains for the waypoint-to-actuation translation.
struct TrackingParams {
  double lookahead_gain = 0.8;  ///< seconds
  double lookahead_min = 3.0;
  double lookahead_max = 12.0;
  double speed_kp = 2.0;
  double speed_ki = 0.2;
  double integral_limit = 2.0;
  /// Waypoint index used to infer the commanded speed from a time-indexed plan.
  int speed_horizon = 4;
};

nlohmann::json tracking_to_json(const TrackingParams& p);
TrackingParams tracking_from_json(const nlohmann::json& j);

double lookahead_distance(double speed, const TrackingParams& tp);

/// Pure-pursuit steering toward the first path point at lookahead distance,
/// falling back to the last point when the path is shorter.
double pure_pursuit_steer(const EgoState& s, std::span<const Vec2> path, const VehicleParams& p,
                          const TrackingParams& tp);

/// Speed implied by a plan whose points are future positions spaced one
/// control period apart.
double plan_target_speed(const EgoState& s, std::span<const Vec2> plan, double dt, const TrackingParams& tp);

/// Pure-pursuit lateral law plus PI longitudinal law with drag feed-forward.
/// Holds the integrator state across calls within one episode.
class WaypointController {
 public:
  WaypointController(VehicleParams vehicle, TrackingParams tracking, double dt)
      : vehicle_(vehicle), tracking_(tracking), dt_(dt) {}

  ControlCommand operator()(const EgoState& s, std::span<const Vec2> waypoints, double v_target);
  /// Convenience for time-indexed plans: infers v_target first.
  ControlCommand follow_plan(const EgoState& s, std::span<const Vec2> plan);

  void reset() { integral_ = 0.0; }
  double integral() const { return integral_; }

 private:
  VehicleParams vehicle_;
  TrackingParams tracking_;
  double dt_;
  double integral_ = 0.0;
};

/// Stateless form (zero integral) of the translation.
ControlCommand waypoints_to_control(const EgoState& s, std::span<const Vec2> waypoints, double v_target,
                                    const VehicleParams& p = {}, const TrackingParams& tp = {});

}  // namespace twinbench
