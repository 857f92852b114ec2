#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "twinbench/hd_map.hpp"
#include "twinbench/scenario.hpp"

namespace twinbench {

inline constexpr const char* kSynthMapId = "synth-x4";

/// Four-way signalized intersection centred on the origin: two 3.5 m lanes
/// each way per approach, a 2 m median, crosswalks 10-14 m from the centre and
/// stop lines at 15 m. Approaches are numbered counter-clockwise from the
/// south (0 = south, 1 = east, 2 = north, 3 = west); traffic keeps right.
HDMapModel make_intersection_map(const std::string& map_id = kSynthMapId);

enum class LightPlan { automatic, green, red_then_green, yellow };
std::string_view to_string(LightPlan p);
LightPlan parse_light_plan(std::string_view s);

struct GeneratorSpec {
  SubBehavior behavior = SubBehavior::STR;
  int n_background = 0;
  LightPlan light_plan = LightPlan::automatic;
  std::uint64_t seed = 0;
  std::optional<int> approach;                      ///< ego approach; seeded when absent
  std::optional<AgentCategory> conflict_category;   ///< IPC partner: pedestrian or cyclist
  std::optional<Weather> weather;
  std::optional<TimeOfDay> time_of_day;
  std::string scenario_id;                          ///< derived from label and seed when empty
};

nlohmann::json generator_spec_to_json(const GeneratorSpec& g);
/// Keys: behavior, n_background, light_plan, seed, approach, conflict_category,
/// weather, time_of_day, scenario_id. Only "behavior" is required.
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);

/// Deterministic scenario realizing `spec.behavior`, labelled with it, plus
/// the map it lives on. Throws ArgumentError for unsatisfiable specs.
std::pair<Scenario, HDMapModel> generate_synthetic(const GeneratorSpec& spec);

/// `per_label` specs for each of the 14 sub-labels, ids "canon-<SUB>-<rep>".
std::vector<GeneratorSpec> canonical_suite_specs(int per_label = 3);

struct Corpus {
  std::vector<Scenario> scenarios;
  HDMapModel map;
};
Corpus canonical_suite(int per_label = 3);

}  // namespace twinbench
