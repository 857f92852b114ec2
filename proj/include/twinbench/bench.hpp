#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "twinbench/config.hpp"
#include "twinbench/hd_map.hpp"
#include "twinbench/metrics.hpp"
#include "twinbench/policy_spec.hpp"
#include "twinbench/scenario.hpp"

namespace twinbench {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitViolations = 1, kExitFault = 2 };

struct ScenarioFile {
  std::string name;  ///< file name inside the scenario directory
  Scenario scenario;
};

/// Every *.json in `dir`, ordered by file name. Throws on unreadable or
/// malformed documents, duplicate ids or an empty directory.
std::vector<ScenarioFile> load_scenario_dir(const std::filesystem::path& dir);
/// Maps referenced by the scenarios, read from `<dir>/<intersection_id>.json`.
std::map<std::string, HDMapModel> load_maps_for(std::span<const ScenarioFile> files, const std::filesystem::path& dir);

/// Hex SHA-256 over the canonical documents, sorted.
std::string scenario_set_digest(std::span<const Scenario> scenarios);

struct RunManifest {
  nlohmann::json config;
  std::string scenario_digest;
  std::string policy;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string started_utc;
  std::string finished_utc;

  nlohmann::json to_json() const;
};

/// One episode per scenario on `jobs` worker threads, sorted by scenario_id.
std::vector<EpisodeResult> evaluate_scenarios(std::span<const ScenarioFile> files,
                                              const std::map<std::string, HDMapModel>& maps, PolicyFactory& factory,
                                              const EvalConfig& cfg, std::uint64_t seed, int jobs = 1);

/// Reporting attributes keyed by scenario id; behavior is the main label.
std::map<std::string, ScenarioConditions> conditions_of(std::span<const ScenarioFile> files);

/// Table layout of a summary document: overall line, then one row per
/// behavior, weather and time-of-day group.
std::string render_report(const nlohmann::json& summary);

struct BenchOptions {
  std::filesystem::path scenarios;
  std::filesystem::path maps;
  std::filesystem::path out;
  std::filesystem::path config;
  std::filesystem::path summary;
  std::filesystem::path spec;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string policy = "builtin:expert";
  std::string mode = "vehicles";
  std::string rule = "drop-never-visible";
  std::string suite;
  int per_label = 3;
  int stride = 0;  ///< open-loop anchor stride; 0 takes it from the config
};

/// Command entry points. Each returns an ExitCode; diagnostics go to `err`,
/// human-readable results to `out`. Tool faults surface as exceptions.
int cmd_evaluate(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_openloop(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_classify(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_filter(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_forge(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_validate(const BenchOptions& o, std::ostream& out, std::ostream& err);
int cmd_report(const BenchOptions& o, std::ostream& out, std::ostream& err);

}  // namespace twinbench
