#include "twinbench/bench.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "twinbench/forge.hpp"
#include "twinbench/generator.hpp"
#include "twinbench/openloop.hpp"
#include "twinbench/replay.hpp"

namespace twinbench {

namespace fs = std::filesystem;
using detail::json;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("short write to " + p.string());
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

EvalConfig config_of(const BenchOptions& o) {
  return o.config.empty() ? EvalConfig{} : load_config(read_text(o.config));
}

void require_flag(const fs::path& p, const char* flag) {
  if (p.empty()) throw ArgumentError(std::string(flag) + " is required");
}

std::vector<fs::path> json_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string file_name_for(const Scenario& s) { return s.scenario_id + ".json"; }

constexpr std::string_view kBehaviorOrder[] = {"IPC", "COV", "YLW", "UT", "STP", "STR", "LFT", "RT"};

}  // namespace

std::vector<ScenarioFile> load_scenario_dir(const fs::path& dir) {
  std::vector<ScenarioFile> out;
  std::set<std::string> ids;
  for (const auto& p : json_files(dir)) {
    Scenario s;
    try {
      s = load_scenario(read_text(p));
    } catch (const Error& e) {
      throw Error(p.filename().string() + ": " + e.what());
    }
    if (!ids.insert(s.scenario_id).second) throw Error("duplicate scenario_id '" + s.scenario_id + "'");
    out.push_back({p.filename().string(), std::move(s)});
  }
  if (out.empty()) throw Error("no scenario documents in " + dir.string());
  return out;
}

std::map<std::string, HDMapModel> load_maps_for(std::span<const ScenarioFile> files, const fs::path& dir) {
  std::map<std::string, HDMapModel> maps;
  for (const auto& f : files) {
    const std::string& id = f.scenario.intersection_id;
    if (maps.count(id)) continue;
    const fs::path p = dir / (id + ".json");
    try {
      maps.emplace(id, load_map(read_text(p)));
    } catch (const Error& e) {
      throw Error("map '" + id + "': " + e.what());
    }
  }
  return maps;
}

std::string scenario_set_digest(std::span<const Scenario> scenarios) {
  std::vector<std::string> docs;
  docs.reserve(scenarios.size());
  for (const auto& s : scenarios) docs.push_back(serialize_scenario(s));
  std::sort(docs.begin(), docs.end());

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("sha256: out of memory");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  for (const auto& d : docs) {
    EVP_DigestUpdate(ctx, d.data(), d.size());
    EVP_DigestUpdate(ctx, "\n", 1);
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

json RunManifest::to_json() const {
  return {{"config", config},
          {"scenario_digest", scenario_digest},
          {"policy", policy},
          {"seed", seed},
          {"tool_version", tool_version},
          {"started_utc", started_utc},
          {"finished_utc", finished_utc}};
}

std::vector<EpisodeResult> evaluate_scenarios(std::span<const ScenarioFile> files,
                                              const std::map<std::string, HDMapModel>& maps, PolicyFactory& factory,
                                              const EvalConfig& cfg, std::uint64_t seed, int jobs) {
  if (jobs < 1) throw ArgumentError("--jobs must be >= 1");
  if (jobs > 1 && factory.spec().kind == PolicyKind::bridge)
    throw ArgumentError("bridge policies serve one client; use --jobs 1");
  std::vector<EpisodeResult> results(files.size());
  std::atomic<std::size_t> next{0};
  std::mutex factory_mu;
  std::exception_ptr fault;
  std::mutex fault_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        const Scenario& s = files[i].scenario;
        PolicyHandle p;
        {
          std::lock_guard lock(factory_mu);
          p = factory.create(s);
        }
        results[i] = run_episode(s, maps.at(s.intersection_id), *p, cfg, seed).first;
      } catch (...) {
        std::lock_guard lock(fault_mu);
        if (!fault) fault = std::current_exception();
        next = files.size();
      }
    }
  };
  const int n = std::min<int>(jobs, static_cast<int>(files.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fault) std::rethrow_exception(fault);
  std::sort(results.begin(), results.end(),
            [](const EpisodeResult& a, const EpisodeResult& b) { return a.scenario_id < b.scenario_id; });
  return results;
}

std::map<std::string, ScenarioConditions> conditions_of(std::span<const ScenarioFile> files) {
  std::map<std::string, ScenarioConditions> out;
  for (const auto& f : files) {
    const Scenario& s = f.scenario;
    out[s.scenario_id] = {s.behavior ? std::string(to_string(s.behavior->main)) : "unlabeled",
                          std::string(to_string(s.weather)), std::string(to_string(s.time_of_day))};
  }
  return out;
}

std::string render_report(const json& summary) {
  for (const char* k : {"n_total", "sr", "ds", "per_behavior", "per_weather", "per_time"})
    if (!summary.contains(k)) throw ParseError(std::string("summary: missing '") + k + "'");
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  auto row = [&](const std::string& key, const json& g) {
    os << "  " << std::left << std::setw(12) << key << std::right << std::setw(6) << g.at("n").get<std::size_t>()
       << std::setw(10) << g.at("sr").get<double>() << std::setw(10) << g.at("ds").get<double>() << "\n";
  };
  auto section = [&](const char* title, const json& groups, bool behavior_order) {
    os << title << "\n  " << std::left << std::setw(12) << "group" << std::right << std::setw(6) << "n"
       << std::setw(10) << "SR" << std::setw(10) << "DS" << "\n";
    std::vector<std::string> keys;
    for (auto it = groups.begin(); it != groups.end(); ++it) keys.push_back(it.key());
    if (behavior_order) {
      std::stable_sort(keys.begin(), keys.end(), [](const std::string& a, const std::string& b) {
        auto rank = [](const std::string& k) {
          const auto* it = std::find(std::begin(kBehaviorOrder), std::end(kBehaviorOrder), k);
          return static_cast<int>(it - std::begin(kBehaviorOrder));
        };
        return rank(a) < rank(b);
      });
    }
    for (const auto& k : keys) row(k, groups.at(k));
  };
  os << "Overall  n=" << summary.at("n_total").get<std::size_t>() << "  SR=" << summary.at("sr").get<double>()
     << "  DS=" << summary.at("ds").get<double>() << "\n";
  if (summary.contains("l2") && !summary.at("l2").is_null()) {
    const json& l2 = summary.at("l2");
    os << "L2  1s=" << l2.at("1s").get<double>() << "  2s=" << l2.at("2s").get<double>()
       << "  avg=" << l2.at("avg").get<double>() << "\n";
  }
  section("By behavior", summary.at("per_behavior"), true);
  section("By weather", summary.at("per_weather"), false);
  section("By time of day", summary.at("per_time"), false);
  return os.str();
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const BenchOptions& o, std::ostream& out, std::ostream& err) {
  require_flag(o.scenarios, "--scenarios");
  require_flag(o.maps, "--maps");
  require_flag(o.out, "--out");
  RunManifest manifest;
  manifest.started_utc = utc_now();
  const EvalConfig cfg = config_of(o);
  const PolicySpec spec = parse_policy_spec(o.policy);
  if (spec.kind == PolicyKind::bridge && o.jobs > 1)
    throw ArgumentError("bridge policies serve one client; use --jobs 1");
  const auto files = load_scenario_dir(o.scenarios);
  const auto maps = load_maps_for(files, o.maps);

  PolicyFactory factory(spec, cfg);
  if (spec.kind == PolicyKind::bridge) err << "bridge listening on port " << factory.bridge_port() << std::endl;
  const auto results = evaluate_scenarios(files, maps, factory, cfg, o.seed, o.jobs);

  std::string lines;
  for (const auto& r : results) lines += result_to_json(r).dump() + "\n";
  const BenchmarkSummary summary = summarize(results, conditions_of(files), cfg.penalties, cfg.rc_success_threshold);

  std::vector<Scenario> scenarios;
  for (const auto& f : files) scenarios.push_back(f.scenario);
  manifest.config = config_to_json(cfg);
  manifest.scenario_digest = scenario_set_digest(scenarios);
  manifest.policy = spec.text;
  manifest.seed = o.seed;
  manifest.finished_utc = utc_now();

  write_text(o.out / "episodes.jsonl", lines);
  write_text(o.out / "summary.json", summary_to_json(summary).dump(2) + "\n");
  write_text(o.out / "manifest.json", manifest.to_json().dump(2) + "\n");
  out << std::fixed << std::setprecision(2) << "evaluated " << results.size() << " scenarios  SR=" << summary.sr
      << "  DS=" << summary.ds << "\n";
  return kExitOk;
}

int cmd_openloop(const BenchOptions& o, std::ostream& out, std::ostream&) {
  require_flag(o.scenarios, "--scenarios");
  require_flag(o.out, "--out");
  const EvalConfig cfg = config_of(o);
  const int stride = o.stride > 0 ? o.stride : cfg.l2_anchor_stride;
  const PolicySpec spec = parse_policy_spec(o.policy);
  if (spec.kind == PolicyKind::bridge) throw ArgumentError("openloop takes builtin predictors only");
  const auto files = load_scenario_dir(o.scenarios);
  PolicyFactory factory(spec, cfg);

  std::vector<std::pair<std::string, L2Report>> rows;
  for (const auto& f : files) {
    auto p = factory.create(f.scenario);
    rows.emplace_back(f.scenario.scenario_id, open_loop_l2(*p, f.scenario, stride));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string lines;
  std::vector<L2Report> reports;
  for (const auto& [id, r] : rows) {
    json j = l2_to_json(r);
    j["scenario_id"] = id;
    lines += j.dump() + "\n";
    reports.push_back(r);
  }
  const L2Report agg = mean_l2(reports);
  write_text(o.out / "openloop.jsonl", lines);
  write_text(o.out / "l2.json",
             json{{"policy", spec.text}, {"stride", stride}, {"n", reports.size()}, {"l2", l2_to_json(agg)}}.dump(2) +
                 "\n");
  out << std::fixed << std::setprecision(3) << "L2  1s=" << agg.l2_1s << "  2s=" << agg.l2_2s << "  avg=" << agg.avg
      << "  (" << reports.size() << " scenarios)\n";
  return kExitOk;
}

int cmd_classify(const BenchOptions& o, std::ostream& out, std::ostream&) {
  require_flag(o.scenarios, "--scenarios");
  require_flag(o.maps, "--maps");
  require_flag(o.out, "--out");
  ClassifierConfig ccfg;
  if (!o.config.empty()) ccfg = classifier_from_json(detail::parse_json(read_text(o.config), "classifier config"));
  auto files = load_scenario_dir(o.scenarios);
  const auto maps = load_maps_for(files, o.maps);
  std::size_t changed = 0;
  std::vector<Scenario> labelled;
  for (auto& f : files) {
    const BehaviorLabel label = classify_behavior(f.scenario, maps.at(f.scenario.intersection_id), ccfg);
    if (f.scenario.behavior != label) ++changed;
    f.scenario.behavior = label;
    const fs::path dst = o.out / "scenarios" / f.name;
    const std::string doc = serialize_scenario(f.scenario);
    if (!fs::exists(dst) || read_text(dst) != doc) write_text(dst, doc);
    labelled.push_back(f.scenario);
  }
  write_text(o.out / "distribution.json", stats_to_json(scenario_stats(labelled)).dump(2) + "\n");
  out << "classified " << files.size() << " scenarios, " << changed << " labels changed\n";
  return kExitOk;
}

int cmd_filter(const BenchOptions& o, std::ostream& out, std::ostream&) {
  require_flag(o.scenarios, "--scenarios");
  require_flag(o.out, "--out");
  OcclusionConfig ocfg;
  ocfg.mode = parse_occlusion_mode(o.mode);
  ocfg.removal_rule = parse_removal_rule(o.rule);
  if (!o.config.empty()) ocfg.sensor_range = load_config(read_text(o.config)).sensing_range;
  const auto files = load_scenario_dir(o.scenarios);
  json report = json::array();
  std::size_t removed = 0, trimmed = 0;
  for (const auto& f : files) {
    FilterReport fr;
    const Scenario filtered = occlusion_filter(f.scenario, ocfg, &fr);
    write_text(o.out / "scenarios" / f.name, serialize_scenario(filtered));
    removed += fr.removed.size();
    trimmed += fr.trimmed.size();
    report.push_back({{"scenario_id", f.scenario.scenario_id},
                      {"agents_before", f.scenario.tracks.size() - 1},
                      {"agents_after", filtered.tracks.size() - 1},
                      {"removed", fr.removed},
                      {"trimmed", fr.trimmed}});
  }
  write_text(o.out / "filter_report.json", json{{"mode", to_string(ocfg.mode)},
                                                {"rule", to_string(ocfg.removal_rule)},
                                                {"removed_total", removed},
                                                {"trimmed_total", trimmed},
                                                {"scenarios", report}}
                                               .dump(2) +
                                               "\n");
  out << "filtered " << files.size() << " scenarios: " << removed << " agents removed, " << trimmed << " trimmed\n";
  return kExitOk;
}

int cmd_forge(const BenchOptions& o, std::ostream& out, std::ostream&) {
  require_flag(o.out, "--out");
  std::vector<GeneratorSpec> specs;
  if (!o.suite.empty()) {
    if (o.suite != "canonical") throw ArgumentError("unknown suite '" + o.suite + "'");
    if (!o.spec.empty()) throw ArgumentError("--suite and --spec are exclusive");
    specs = canonical_suite_specs(o.per_label);
  } else if (!o.spec.empty()) {
    const json doc = detail::parse_json(read_text(o.spec), "generator spec");
    if (doc.is_array()) {
      for (const auto& j : doc) specs.push_back(generator_spec_from_json(j));
    } else {
      specs.push_back(generator_spec_from_json(doc));
    }
  } else {
    throw ArgumentError("forge needs --suite or --spec");
  }
  std::set<std::string> ids;
  std::map<std::string, HDMapModel> maps;
  for (const auto& spec : specs) {
    auto [s, m] = generate_synthetic(spec);
    if (!ids.insert(s.scenario_id).second) throw ArgumentError("duplicate scenario_id '" + s.scenario_id + "'");
    write_text(o.out / "scenarios" / file_name_for(s), serialize_scenario(s));
    maps.emplace(m.map_id, std::move(m));
  }
  for (const auto& [id, m] : maps) write_text(o.out / "maps" / (id + ".json"), serialize_map(m));
  out << "forged " << specs.size() << " scenarios into " << (o.out / "scenarios").string() << "\n";
  return kExitOk;
}

int cmd_validate(const BenchOptions& o, std::ostream& out, std::ostream&) {
  require_flag(o.scenarios, "--scenarios");
  require_flag(o.maps, "--maps");
  std::size_t bad = 0, n = 0;
  std::map<std::string, HDMapModel> maps;
  for (const auto& p : json_files(o.scenarios)) {
    ++n;
    const std::string name = p.filename().string();
    std::vector<Violation> vs;
    try {
      const Scenario s = load_scenario(read_text(p));
      auto it = maps.find(s.intersection_id);
      if (it == maps.end()) {
        const fs::path mp = o.maps / (s.intersection_id + ".json");
        try {
          it = maps.emplace(s.intersection_id, load_map(read_text(mp))).first;
        } catch (const Error& e) {
          vs.push_back({"map", e.what()});
        }
      }
      if (it != maps.end()) vs = validate_scenario(s, it->second);
    } catch (const ParseError& e) {
      vs.push_back({"parse", e.what()});
    } catch (const InvariantError& e) {
      vs.push_back({"invariant", e.what()});
    }
    for (const auto& v : vs) out << name << ": " << v.code << ": " << v.detail << "\n";
    if (!vs.empty()) ++bad;
  }
  if (n == 0) throw Error("no scenario documents in " + o.scenarios.string());
  out << n - bad << "/" << n << " scenarios valid\n";
  return bad == 0 ? kExitOk : kExitViolations;
}

int cmd_report(const BenchOptions& o, std::ostream& out, std::ostream&) {
  if (o.summary.empty()) throw ArgumentError("--summary is required");
  const std::string text = render_report(detail::parse_json(read_text(o.summary), "summary"));
  if (!o.out.empty()) write_text(o.out / "report.txt", text);
  out << text;
  return kExitOk;
}

}  // namespace twinbench
