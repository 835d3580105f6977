// Command-line front end: run scenarios and list fixtures or checks.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "cpecheck/report.hpp"

using namespace cpecheck;

namespace {

int write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 1;
  }
  out << content;
  return 0;
}

int run(const std::string& scenario_path, const std::string& out, const std::string& csv, const std::string& jet,
        int threads) {
  try {
    Scenario s = load_scenario(scenario_path);
    if (!jet.empty()) {
      s.jet_mode = jet_mode_from_string(jet);
      const Tolerances d = Tolerances::defaults(s.jet_mode);
      s.tolerances.tier3 = std::max(s.tolerances.tier3, d.tier3);
    }
    if (threads > 0) s.threads = threads;
    const IdentityReport rep = run_scenario(s);
    const std::string text = report_to_json(rep).dump(2) + "\n";
    if (out.empty()) {
      std::cout << text;
    } else if (write_file(out, text) != 0) {
      return 1;
    }
    if (!csv.empty() && write_file(csv, report_to_csv(rep)) != 0) return 1;
    for (const CheckResult& c : rep.checks) {
      std::cerr << (c.pass ? "PASS " : "FAIL ") << c.info.id << "  max=" << c.summary.max
                << "  threshold=" << c.threshold << "\n";
    }
    return rep.pass ? 0 : 2;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
  } catch (const CheckEvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cpecheck: tensor identity residuals on 4-dimensional Riemannian metrics"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  std::string scenario, out, csv, jet;
  int threads = 0;
  auto* run_cmd = app.add_subcommand("run", "evaluate a scenario file");
  run_cmd->add_option("scenario", scenario, "scenario JSON file")->required();
  run_cmd->add_option("--out", out, "write the JSON report here instead of stdout");
  run_cmd->add_option("--csv", csv, "also write a per-point CSV table");
  run_cmd->add_option("--jet", jet, "derivative engine")->check(CLI::IsMember({"taylor", "fd"}));
  run_cmd->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));

  auto* fixtures_cmd = app.add_subcommand("list-fixtures", "list catalog fixtures and their parameters");
  auto* checks_cmd = app.add_subcommand("list-checks", "list check ids with tiers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run_cmd) return run(scenario, out, csv, jet, threads);
  if (*fixtures_cmd) {
    for (const FixtureInfo& f : fixture_catalog()) {
      std::cout << f.id;
      for (const auto& [name, def] : f.params) std::cout << " " << name << "=" << def;
      std::cout << "\n    " << f.description << "\n";
    }
    return 0;
  }
  if (*checks_cmd) {
    const Tolerances t;
    for (const CheckInfo& c : check_catalog()) {
      std::cout << c.id << "  " << to_string(c.tier) << " (" << t.threshold(c.tier) << ")"
                << (c.needs_regular ? "  regular points" : "") << "\n    " << c.description << "\n";
    }
    return 0;
  }
  return 1;
}
