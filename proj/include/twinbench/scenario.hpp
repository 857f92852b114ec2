#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "twinbench/geometry.hpp"
#include "twinbench/hd_map.hpp"

namespace twinbench {

inline constexpr int kTickHz = 10;
inline constexpr double kTickDt = 1.0 / kTickHz;

enum class AgentCategory { car, truck, bus, van, motorcycle, tricycle, cyclist, pedestrian };
inline constexpr std::array<AgentCategory, 8> kAllCategories = {
    AgentCategory::car,        AgentCategory::truck,    AgentCategory::bus,     AgentCategory::van,
    AgentCategory::motorcycle, AgentCategory::tricycle, AgentCategory::cyclist, AgentCategory::pedestrian};

std::string_view to_string(AgentCategory c);
AgentCategory parse_category(std::string_view s);
/// car, truck, bus, van.
bool is_vehicle(AgentCategory c);
/// Default footprint (length, width) used by the generator.
std::pair<double, double> default_dimensions(AgentCategory c);

enum class SignalState { red, yellow, green, off };
std::string_view to_string(SignalState s);
SignalState parse_signal_state(std::string_view s);

enum class Weather { sunny, cloudy, overcast, rain, fog, snow };
inline constexpr std::array<Weather, 6> kAllWeather = {Weather::sunny,    Weather::cloudy, Weather::overcast,
                                                       Weather::rain,     Weather::fog,    Weather::snow};
std::string_view to_string(Weather w);
Weather parse_weather(std::string_view s);

enum class TimeOfDay { morning, noon, afternoon, evening, night };
inline constexpr std::array<TimeOfDay, 5> kAllTimes = {TimeOfDay::morning, TimeOfDay::noon, TimeOfDay::afternoon,
                                                       TimeOfDay::evening, TimeOfDay::night};
std::string_view to_string(TimeOfDay t);
TimeOfDay parse_time_of_day(std::string_view s);

enum class MainBehavior { IPC, COV, YLW, UT, STP, STR, LFT, RT };
enum class SubBehavior {
  COV_LFT, COV_RT, COV_STR, IPC_LFT, IPC_RT, IPC_STR, YLW_LFT, YLW_STR, UT_N, UT_AN, LFT, RT, STR, STP
};
inline constexpr std::array<SubBehavior, 14> kAllSubBehaviors = {
    SubBehavior::COV_LFT, SubBehavior::COV_RT,  SubBehavior::COV_STR, SubBehavior::IPC_LFT, SubBehavior::IPC_RT,
    SubBehavior::IPC_STR, SubBehavior::YLW_LFT, SubBehavior::YLW_STR, SubBehavior::UT_N,    SubBehavior::UT_AN,
    SubBehavior::LFT,     SubBehavior::RT,      SubBehavior::STR,     SubBehavior::STP};

std::string_view to_string(MainBehavior b);
std::string_view to_string(SubBehavior b);
MainBehavior parse_main_behavior(std::string_view s);
SubBehavior parse_sub_behavior(std::string_view s);
MainBehavior main_of(SubBehavior sub);

struct BehaviorLabel {
  MainBehavior main = MainBehavior::STR;
  SubBehavior sub = SubBehavior::STR;

  static BehaviorLabel from_sub(SubBehavior s) { return {main_of(s), s}; }
  bool operator==(const BehaviorLabel&) const = default;
  auto operator<=>(const BehaviorLabel&) const = default;
};

struct TrackSample {
  int tick = 0;
  Pose2 pose;
  double speed = 0.0;

  bool operator==(const TrackSample&) const = default;
};

struct AgentTrack {
  std::string track_id;
  AgentCategory category = AgentCategory::car;
  double length = 4.6;
  double width = 1.9;
  std::vector<TrackSample> samples;

  int first_tick() const { return samples.front().tick; }
  int last_tick() const { return samples.back().tick; }
  bool alive_at(int tick) const { return !samples.empty() && tick >= first_tick() && tick <= last_tick(); }
  OrientedBox box_at(const Pose2& p) const { return {p.position(), p.heading, length, width}; }
  Polyline path() const;

  bool operator==(const AgentTrack&) const = default;
};

struct SignalGroup {
  std::string group_id;
  Segment stop_line;
  std::vector<std::string> controlled_lane_ids;  ///< sorted, unique
  std::vector<std::pair<int, SignalState>> schedule;

  bool operator==(const SignalGroup&) const = default;
};

struct EgoAssignment {
  std::string agent_id;
  Pose2 source;
  Pose2 destination;
  Polyline route_waypoints;

  bool operator==(const EgoAssignment&) const = default;
};

struct Scenario {
  std::string scenario_id;
  std::string intersection_id;
  int tick_hz = kTickHz;
  int n_ticks = 0;
  Weather weather = Weather::sunny;
  TimeOfDay time_of_day = TimeOfDay::noon;
  std::optional<BehaviorLabel> behavior;
  std::vector<AgentTrack> tracks;
  std::vector<SignalGroup> signals;
  EgoAssignment ego;

  const AgentTrack* find_track(std::string_view id) const;
  const AgentTrack& ego_track() const;

  bool operator==(const Scenario&) const = default;
};

/// Throws InvariantError naming the first broken field.
void check_scenario(const Scenario& s);

Scenario load_scenario(std::string_view text);
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const Scenario& s);
/// Canonical document text; identical scenarios serialize to identical bytes.
std::string serialize_scenario(const Scenario& s);

nlohmann::json behavior_to_json(const BehaviorLabel& b);

struct Violation {
  std::string code;
  std::string detail;
};

/// Map cross-checks; empty result means the pair is consistent.
std::vector<Violation> validate_scenario(const Scenario& s, const HDMapModel& m);

struct TrackState {
  Pose2 pose;
  double speed = 0.0;
};

/// Continuous-time replay of a track. Exact at sample times; linear position
/// and speed with shortest-arc heading in between. Throws ArgumentError outside
/// the sampled span.
TrackState sample_track_pose(const AgentTrack& t, double time_s);
/// Same interpolation addressed by tick; nullopt when the agent is absent.
std::optional<TrackState> track_state_at_tick(const AgentTrack& t, int tick);

/// Downsampled route plus endpoints derived from a recorded track.
EgoAssignment make_ego_assignment(const AgentTrack& t, double spacing = 5.0);

struct DistributionReport {
  std::size_t n_scenarios = 0;
  std::map<std::string, std::size_t> behavior_counts;
  std::map<std::string, std::size_t> category_counts;
  std::map<std::string, std::size_t> weather_counts;
  std::map<std::string, std::size_t> time_counts;

  static std::map<std::string, double> fractions(const std::map<std::string, std::size_t>& counts);
};

DistributionReport scenario_stats(std::span<const Scenario> set);
nlohmann::json stats_to_json(const DistributionReport& r);

Scenario transform_scenario(const Scenario& s, const RigidTransform& tf);

}  // namespace twinbench
