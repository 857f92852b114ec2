#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include "twinbench/errors.hpp"
#include "twinbench/metrics.hpp"
#include "twinbench/observation.hpp"
#include "twinbench/scenario.hpp"
#include "twinbench/vehicle.hpp"

namespace twinbench {

enum class PolicyKind { builtin, bridge };
enum class PolicyMode { control, waypoints };

/// Number of future points (one per tick) emitted by the builtin planners.
inline constexpr int kPlanHorizon = 20;

struct EpisodeContext {
  std::string scenario_id;
  Polyline route;
  VehicleParams vehicle;
  int tick_hz = kTickHz;
  std::uint64_t seed = 0;
};

/// World-frame future positions, one control period apart.
struct WaypointPlan {
  Polyline points;

  bool operator==(const WaypointPlan&) const = default;
};

using PolicyOutput = std::variant<ControlCommand, WaypointPlan>;

enum class PolicyErrorKind { timeout, protocol, disconnect };

/// Raised by a policy that cannot answer an observation.
class PolicyError : public Error {
 public:
  PolicyError(PolicyErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  PolicyErrorKind kind() const noexcept { return kind_; }

 private:
  PolicyErrorKind kind_;
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  virtual PolicyKind kind() const { return PolicyKind::builtin; }
  virtual PolicyMode mode() const = 0;

  virtual void begin_episode(const EpisodeContext& /*ctx*/) {}
  virtual PolicyOutput act(const Observation& obs) = 0;
  virtual void end_episode(const EpisodeResult& /*result*/) {}
};

using PolicyHandle = std::unique_ptr<Policy>;

/// Replays the recorded ego track: at tick t emits the recorded positions of
/// ticks t+1 .. t+20 (clamped at the end of the recording).
PolicyHandle builtin_expert_replay(const Scenario& s);
/// Follows the remaining route at a constant target speed; ignores agents and
/// signals.
PolicyHandle builtin_pid_follower(double v_target, double max_speed = VehicleParams{}.max_speed);
/// Straight-line extrapolation of the current speed and heading.
PolicyHandle builtin_constant_velocity();
/// Predicts zero motion (waypoint mode).
PolicyHandle builtin_stationary();
/// Control mode, full brake on every tick.
PolicyHandle builtin_full_brake();

/// Shared by the builtin follower and reference bridge clients so that both
/// produce bit-identical plans.
WaypointPlan follow_route_plan(const Observation& obs, double v_target, double dt = kTickDt);
WaypointPlan constant_velocity_plan(const Observation& obs, double dt = kTickDt);

}  // namespace twinbench
