#include <iostream>

#include "CLI11.hpp"
#include "twinbench/bench.hpp"
#include "twinbench/errors.hpp"

using namespace twinbench;

namespace {

void add_common(CLI::App* cmd, BenchOptions& o) {
  cmd->add_option("--scenarios", o.scenarios, "Directory of scenario documents");
  cmd->add_option("--maps", o.maps, "Directory of map documents named <map_id>.json");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--config", o.config, "Configuration file (JSON)");
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--jobs", o.jobs, "Parallel episodes")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop intersection driving benchmark"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  BenchOptions o;

  auto* evaluate = app.add_subcommand("evaluate", "Closed-loop evaluation of a policy");
  add_common(evaluate, o);
  evaluate->add_option("--policy", o.policy, "builtin:<name>[?k=v] or bridge:<host>:<port>");

  auto* openloop = app.add_subcommand("openloop", "Open-loop L2 of a waypoint predictor");
  add_common(openloop, o);
  openloop->add_option("--policy", o.policy, "Predictor spec");
  openloop->add_option("--stride", o.stride, "Ticks between anchors")->check(CLI::PositiveNumber);

  auto* classify = app.add_subcommand("classify", "Label scenarios with behaviors");
  add_common(classify, o);

  auto* filter = app.add_subcommand("filter", "Remove agents the ego never sees");
  add_common(filter, o);
  filter->add_option("--mode", o.mode, "none, vehicles or all");
  filter->add_option("--rule", o.rule, "drop-never-visible or visible-intervals");

  auto* forge = app.add_subcommand("forge", "Generate synthetic scenarios");
  add_common(forge, o);
  forge->add_option("--suite", o.suite, "Named suite (canonical)");
  forge->add_option("--per-label", o.per_label, "Scenarios per sub-label in a suite")->check(CLI::PositiveNumber);
  forge->add_option("--spec", o.spec, "Generator spec document or array of specs");

  auto* validate = app.add_subcommand("validate", "Check scenarios against their maps");
  add_common(validate, o);

  auto* report = app.add_subcommand("report", "Render a summary as tables");
  add_common(report, o);
  report->add_option("--summary", o.summary, "summary.json from evaluate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFault;
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(o, std::cout, std::cerr);
    if (openloop->parsed()) return cmd_openloop(o, std::cout, std::cerr);
    if (classify->parsed()) return cmd_classify(o, std::cout, std::cerr);
    if (filter->parsed()) return cmd_filter(o, std::cout, std::cerr);
    if (forge->parsed()) return cmd_forge(o, std::cout, std::cerr);
    if (validate->parsed()) return cmd_validate(o, std::cout, std::cerr);
    if (report->parsed()) return cmd_report(o, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "twinbench: " << e.what() << "\n";
    return kExitFault;
  }
  return kExitFault;
}
