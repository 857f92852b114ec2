#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "twinbench/errors.hpp"
#include "twinbench/hd_map.hpp"
#include "twinbench/scenario.hpp"
#include "twinbench/vehicle.hpp"

namespace twinbench {

// ---------------------------------------------------------------------------
// Trajectory quality

struct QualityWeights {
  double completeness = 0.5;
  double compliance = 0.5;
};

struct QualityScore {
  double completeness = 0.0;
  double compliance = 0.0;
  double total = 0.0;
};

/// Completeness is observed over spanned ticks, zeroed by any gap above one
/// second. Compliance is the fraction of samples that are on the drivable
/// area, below 1.5x top speed, within 1.5x braking deceleration of the
/// previous sample and did not cross a red stop line since it.
QualityScore quality_score(const AgentTrack& t, const HDMapModel& m, std::span<const SignalGroup> signals,
                           const VehicleParams& limits = {}, const QualityWeights& w = {});

// ---------------------------------------------------------------------------
// Behavior classification

struct ClassifierConfig {
  double straight_max_deg = 30.0;
  double uturn_min_deg = 150.0;
  double stop_speed = 0.5;
  double stop_dwell_s = 2.0;
  double stop_zone_m = 10.0;
  double ipc_distance = 3.0;
  double ipc_min_speed = 1.0;
  double cov_distance = 4.0;
  double uturn_start_deg = 20.0;
  double uturn_end_deg = 160.0;
};

nlohmann::json classifier_to_json(const ClassifierConfig& c);
ClassifierConfig classifier_from_json(const nlohmann::json& j);

/// Per-predicate evidence, exposed for diagnostics and tests.
struct BehaviorEvidence {
  double heading_change_deg = 0.0;
  bool stopped_at_red = false;
  bool crossed_on_yellow = false;
  bool near_vulnerable = false;
  bool competing_vehicle = false;
  bool abnormal_uturn = false;
};

BehaviorEvidence behavior_evidence(const Scenario& s, const HDMapModel& m, const ClassifierConfig& cfg = {});
BehaviorLabel classify_behavior(const Scenario& s, const HDMapModel& m, const ClassifierConfig& cfg = {});
/// Label from evidence alone; combinations outside the 14 sub-labels fall
/// through to the next predicate in precedence order.
BehaviorLabel label_from_evidence(const BehaviorEvidence& ev, const ClassifierConfig& cfg = {});

/// Vehicles considered by the competing-vehicle predicate.
bool is_motor_vehicle(AgentCategory c);

// ---------------------------------------------------------------------------
// Ego selection

struct EgoSelectionConfig {
  double min_route_m = 20.0;
  double min_quality = 0.8;
};

/// Eligible: car, present on every tick, path >= min_route_m, quality >=
/// min_quality. Picks the least represented classified label, then the
/// smallest track_id. Throws ArgumentError when nothing is eligible.
std::string select_ego(const Scenario& s, const HDMapModel& m, const std::map<BehaviorLabel, std::size_t>& counts,
                       const EgoSelectionConfig& cfg = {}, const ClassifierConfig& ccfg = {});

/// The scenario re-centred on another track as ego.
Scenario with_ego(const Scenario& s, const std::string& track_id);

// ---------------------------------------------------------------------------
// Occlusion filtering

enum class OcclusionMode { none, vehicles, all };
enum class RemovalRule { drop_never_visible, visible_intervals };

std::string_view to_string(OcclusionMode m);
OcclusionMode parse_occlusion_mode(std::string_view s);
std::string_view to_string(RemovalRule r);
RemovalRule parse_removal_rule(std::string_view s);

struct OcclusionConfig {
  OcclusionMode mode = OcclusionMode::vehicles;
  double sensor_range = 85.0;
  int boundary_samples = 8;
  RemovalRule removal_rule = RemovalRule::drop_never_visible;
  double visibility_fraction_min = 0.10;
};

struct FilterReport {
  std::vector<std::string> removed;  ///< whole tracks dropped
  std::vector<std::string> trimmed;  ///< tracks cut to a visible run
};

/// Visibility of `target` from the recorded ego pose at `tick`.
bool agent_visible(const Scenario& s, const AgentTrack& target, int tick, const OcclusionConfig& cfg);

/// Removes or trims agents the ego could not see. The visible-intervals rule
/// keeps the longest visible run of each track (earliest on ties).
Scenario occlusion_filter(const Scenario& s, const OcclusionConfig& cfg, FilterReport* report = nullptr);

}  // namespace twinbench
