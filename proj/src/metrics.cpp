#include "twinbench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"

namespace twinbench {

using detail::json;

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "collision_pedestrian", "collision_cyclist", "collision_vehicle", "collision_static", "red_light",
    "off_road",             "route_deviation",   "timeout",           "policy_failure"};

constexpr std::array<std::string_view, 7> kTerminationNames = {
    "completed", "collision", "off_road", "timeout", "policy_timeout", "protocol_violation", "policy_disconnect"};

}  // namespace

std::string_view to_string(InfractionKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

InfractionKind parse_infraction_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<InfractionKind>(i);
  }
  throw ParseError("unknown infraction kind '" + std::string(s) + "'");
}

bool is_collision(InfractionKind k) {
  return k == InfractionKind::collision_pedestrian || k == InfractionKind::collision_cyclist ||
         k == InfractionKind::collision_vehicle || k == InfractionKind::collision_static;
}

bool is_violation(InfractionKind k) {
  return is_collision(k) || k == InfractionKind::off_road || k == InfractionKind::red_light ||
         k == InfractionKind::route_deviation;
}

std::string_view to_string(Termination t) { return kTerminationNames[static_cast<std::size_t>(t)]; }

Termination parse_termination(std::string_view s) {
  for (std::size_t i = 0; i < kTerminationNames.size(); ++i) {
    if (kTerminationNames[i] == s) return static_cast<Termination>(i);
  }
  throw ParseError("unknown termination '" + std::string(s) + "'");
}

PenaltyTable::PenaltyTable() {
  coeff_.fill(1.0);
  set(InfractionKind::collision_pedestrian, 0.50);
  set(InfractionKind::collision_cyclist, 0.60);
  set(InfractionKind::collision_vehicle, 0.60);
  set(InfractionKind::collision_static, 0.65);
  set(InfractionKind::red_light, 0.70);
  set(InfractionKind::off_road, 0.65);
}

void PenaltyTable::set(InfractionKind k, double value) {
  if (!(value > 0.0 && value <= 1.0))
    throw InvariantError("penalties." + std::string(to_string(k)), "coefficient must lie in (0, 1]");
  const bool gating = k == InfractionKind::timeout || k == InfractionKind::route_deviation ||
                      k == InfractionKind::policy_failure;
  if (gating && value != 1.0)
    throw InvariantError("penalties." + std::string(to_string(k)), "gating kinds must map to 1.0");
  coeff_[static_cast<std::size_t>(k)] = value;
}

json PenaltyTable::to_json() const {
  json j = json::object();
  for (auto k : kAllInfractionKinds) j[std::string(to_string(k))] = (*this)[k];
  return j;
}

PenaltyTable PenaltyTable::from_json(const json& j) {
  if (!j.is_object()) throw ParseError("penalties: expected object");
  PenaltyTable t;
  for (auto it = j.begin(); it != j.end(); ++it)
    t.set(parse_infraction_kind(it.key()), detail::as_number(it.value(), "penalties." + it.key()));
  return t;
}

double EpisodeResult::score() const {
  double prod = 1.0;
  for (const auto& inf : infractions) prod *= inf.penalty;
  return rc * prod;
}

json result_to_json(const EpisodeResult& r) {
  json infs = json::array();
  for (const auto& i : r.infractions) {
    infs.push_back({{"kind", std::string(to_string(i.kind))},
                    {"tick", i.tick},
                    {"penalty", i.penalty},
                    {"terminal", i.terminal}});
  }
  return {{"scenario_id", r.scenario_id},
          {"rc", r.rc},
          {"infractions", infs},
          {"success", r.success},
          {"termination", std::string(to_string(r.termination))},
          {"duration_ticks", r.duration_ticks},
          {"ds", r.score()}};
}

EpisodeResult result_from_json(const json& j) {
  EpisodeResult r;
  r.scenario_id = detail::as_string(detail::require(j, "scenario_id", "result"), "scenario_id");
  r.rc = detail::as_number(detail::require(j, "rc", "result"), "rc");
  for (const auto& ji : detail::as_array(detail::require(j, "infractions", "result"), "infractions")) {
    Infraction i;
    i.kind = parse_infraction_kind(detail::as_string(detail::require(ji, "kind", "infraction"), "kind"));
    i.tick = static_cast<int>(detail::as_integer(detail::require(ji, "tick", "infraction"), "tick"));
    i.penalty = detail::as_number(detail::require(ji, "penalty", "infraction"), "penalty");
    const json& jt = detail::require(ji, "terminal", "infraction");
    if (!jt.is_boolean()) throw ParseError("infraction.terminal: expected boolean");
    i.terminal = jt.get<bool>();
    r.infractions.push_back(i);
  }
  const json& js = detail::require(j, "success", "result");
  if (!js.is_boolean()) throw ParseError("result.success: expected boolean");
  r.success = js.get<bool>();
  r.termination = parse_termination(detail::as_string(detail::require(j, "termination", "result"), "termination"));
  r.duration_ticks =
      static_cast<int>(detail::as_integer(detail::require(j, "duration_ticks", "result"), "duration_ticks"));
  return r;
}

bool episode_succeeded(const EpisodeResult& r, double rc_threshold) {
  if (r.termination != Termination::completed || r.rc < rc_threshold) return false;
  return std::none_of(r.infractions.begin(), r.infractions.end(),
                      [](const Infraction& i) { return is_violation(i.kind); });
}

double driving_score(std::span<const EpisodeResult> results, const PenaltyTable& table) {
  if (results.empty()) throw ArgumentError("driving_score: empty result set");
  double sum = 0.0;
  for (const auto& r : results) {
    double prod = 1.0;
    for (const auto& inf : r.infractions) prod *= table[inf.kind];
    sum += r.rc * prod;
  }
  return 100.0 * sum / static_cast<double>(results.size());
}

double success_rate(std::span<const EpisodeResult> results, double rc_threshold) {
  if (results.empty()) throw ArgumentError("success_rate: empty result set");
  const auto wins = std::count_if(results.begin(), results.end(),
                                  [rc_threshold](const EpisodeResult& r) { return episode_succeeded(r, rc_threshold); });
  return 100.0 * static_cast<double>(wins) / static_cast<double>(results.size());
}

double route_completion(std::span<const Vec2> ego_positions, std::span<const Vec2> route, double max_offset) {
  if (ego_positions.empty()) throw ArgumentError("route_completion: empty trace");
  const double total = polyline_length(route);
  if (total <= 0.0) return 0.0;
  double progress = 0.0;
  for (const Vec2& p : ego_positions) {
    const auto proj = project_onto_polyline(route, p);
    if (std::abs(proj.d) <= max_offset) progress = std::max(progress, proj.s);
  }
  return std::clamp(progress / total, 0.0, 1.0);
}

BenchmarkSummary summarize(std::span<const EpisodeResult> results,
                           const std::map<std::string, ScenarioConditions>& conditions, const PenaltyTable& table,
                           double rc_threshold) {
  if (results.empty()) throw ArgumentError("summarize: empty result set");
  std::vector<EpisodeResult> sorted(results.begin(), results.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const EpisodeResult& a, const EpisodeResult& b) { return a.scenario_id < b.scenario_id; });

  BenchmarkSummary s;
  s.n_total = sorted.size();
  s.ds = driving_score(sorted, table);
  s.sr = success_rate(sorted, rc_threshold);

  std::map<std::string, std::vector<EpisodeResult>> by_behavior, by_weather, by_time;
  for (const auto& r : sorted) {
    auto it = conditions.find(r.scenario_id);
    if (it == conditions.end()) throw ArgumentError("summarize: dangling scenario_id '" + r.scenario_id + "'");
    by_behavior[it->second.behavior].push_back(r);
    by_weather[it->second.weather].push_back(r);
    by_time[it->second.time_of_day].push_back(r);
  }
  auto fill = [&](const std::map<std::string, std::vector<EpisodeResult>>& groups,
                  std::map<std::string, GroupStats>& out) {
    for (const auto& [key, rs] : groups)
      out[key] = GroupStats{rs.size(), success_rate(rs, rc_threshold), driving_score(rs, table)};
  };
  fill(by_behavior, s.per_behavior);
  fill(by_weather, s.per_weather);
  fill(by_time, s.per_time);
  return s;
}

json l2_to_json(const L2Report& r) {
  return {{"1s", r.l2_1s}, {"2s", r.l2_2s}, {"avg", r.avg}, {"anchors", r.anchors}};
}

json summary_to_json(const BenchmarkSummary& s) {
  auto groups = [](const std::map<std::string, GroupStats>& g) {
    json j = json::object();
    for (const auto& [k, v] : g) j[k] = {{"n", v.n}, {"sr", v.sr}, {"ds", v.ds}};
    return j;
  };
  return {{"n_total", s.n_total},
          {"ds", s.ds},
          {"sr", s.sr},
          {"per_behavior", groups(s.per_behavior)},
          {"per_weather", groups(s.per_weather)},
          {"per_time", groups(s.per_time)},
          {"l2", s.l2 ? l2_to_json(*s.l2) : json(nullptr)}};
}

}  // namespace twinbench
