#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "twinbench/geometry.hpp"

namespace twinbench {

enum class InfractionKind {
  collision_pedestrian,
  collision_cyclist,
  collision_vehicle,
  collision_static,
  red_light,
  off_road,
  route_deviation,
  timeout,
  policy_failure,
};
inline constexpr std::array<InfractionKind, 9> kAllInfractionKinds = {
    InfractionKind::collision_pedestrian, InfractionKind::collision_cyclist, InfractionKind::collision_vehicle,
    InfractionKind::collision_static,     InfractionKind::red_light,         InfractionKind::off_road,
    InfractionKind::route_deviation,      InfractionKind::timeout,           InfractionKind::policy_failure};

std::string_view to_string(InfractionKind k);
InfractionKind parse_infraction_kind(std::string_view s);
bool is_collision(InfractionKind k);
/// Kinds that fail an episode: collisions, off_road, red_light, route_deviation.
bool is_violation(InfractionKind k);

/// Multiplicative penalty per infraction kind, each in (0, 1].
class PenaltyTable {
 public:
  /// Leaderboard-style defaults: pedestrian 0.50, vehicle/cyclist 0.60,
  /// static 0.65, red light 0.70, off-road 0.65; gating kinds 1.0.
  PenaltyTable();

  double operator[](InfractionKind k) const { return coeff_[static_cast<std::size_t>(k)]; }
  void set(InfractionKind k, double value);

  nlohmann::json to_json() const;
  static PenaltyTable from_json(const nlohmann::json& j);

 private:
  std::array<double, kAllInfractionKinds.size()> coeff_{};
};

struct Infraction {
  InfractionKind kind = InfractionKind::timeout;
  int tick = 0;
  double penalty = 1.0;
  bool terminal = false;

  bool operator==(const Infraction&) const = default;
};

enum class Termination {
  completed,
  collision,
  off_road,
  timeout,
  policy_timeout,
  protocol_violation,
  policy_disconnect,
};
std::string_view to_string(Termination t);
Termination parse_termination(std::string_view s);

struct EpisodeResult {
  std::string scenario_id;
  double rc = 0.0;
  std::vector<Infraction> infractions;
  bool success = false;
  Termination termination = Termination::timeout;
  int duration_ticks = 0;

  /// rc times the product of the stored penalties.
  double score() const;
  bool operator==(const EpisodeResult&) const = default;
};

nlohmann::json result_to_json(const EpisodeResult& r);
EpisodeResult result_from_json(const nlohmann::json& j);

/// Success predicate shared by the episode runner and the aggregations.
bool episode_succeeded(const EpisodeResult& r, double rc_threshold = 0.95);

/// Mean over routes of RC times the product of penalties, as a percentage.
/// Penalties are looked up in `table` by kind.
double driving_score(std::span<const EpisodeResult> results, const PenaltyTable& table);
double success_rate(std::span<const EpisodeResult> results, double rc_threshold = 0.95);

/// Completion fraction from a sequence of ego positions. Progress only
/// advances while the lateral offset stays within `max_offset`.
double route_completion(std::span<const Vec2> ego_positions, std::span<const Vec2> route, double max_offset = 8.0);

struct GroupStats {
  std::size_t n = 0;
  double sr = 0.0;
  double ds = 0.0;

  bool operator==(const GroupStats&) const = default;
};

struct L2Report {
  double l2_1s = 0.0;
  double l2_2s = 0.0;
  double avg = 0.0;
  std::size_t anchors = 0;
};

struct BenchmarkSummary {
  std::size_t n_total = 0;
  double ds = 0.0;
  double sr = 0.0;
  std::map<std::string, GroupStats> per_behavior;
  std::map<std::string, GroupStats> per_weather;
  std::map<std::string, GroupStats> per_time;
  std::optional<L2Report> l2;
};

/// Reporting attributes of one scenario.
struct ScenarioConditions {
  std::string behavior = "unlabeled";
  std::string weather;
  std::string time_of_day;
};

/// Throws ArgumentError when a result has no matching conditions entry.
BenchmarkSummary summarize(std::span<const EpisodeResult> results,
                           const std::map<std::string, ScenarioConditions>& conditions, const PenaltyTable& table,
                           double rc_threshold = 0.95);

nlohmann::json summary_to_json(const BenchmarkSummary& s);
nlohmann::json l2_to_json(const L2Report& r);

}  // namespace twinbench
