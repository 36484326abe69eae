#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twistlab/errors.hpp"
#include "twistlab/scenarios.hpp"

namespace tl = twistlab;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::string format = "json";
  std::optional<std::uint64_t> seed;
};

void attach_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "JSON config file; defaults are built in")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out, "output directory for the report");
  cmd->add_option("--seed", opt.seed, "override the config seed");
  cmd->add_option("--format", opt.format, "json or csv-bundle")
      ->check(CLI::IsMember({"json", "csv-bundle"}));
}

tl::ExperimentConfig load(const Options& opt, const std::string& fallback,
                          const std::vector<std::string>& accepted) {
  tl::ExperimentConfig cfg = opt.config.empty()
                                 ? tl::ExperimentConfig::from_json(tl::default_config(fallback))
                                 : tl::ExperimentConfig::from_file(opt.config);
  if (std::find(accepted.begin(), accepted.end(), cfg.scenario) == accepted.end())
    throw tl::ConfigError("scenario '" + cfg.scenario + "' does not belong to this verb");
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.echo["seed"] = *opt.seed;
  }
  return cfg;
}

int report_outcome(const std::vector<tl::Report>& reports, const Options& opt, bool suite) {
  if (suite)
    tl::emit_suite(reports, opt.out, opt.format);
  else
    tl::emit(reports.front(), opt.out, opt.format);
  bool all = true;
  for (const auto& r : reports) {
    for (const auto& v : r.verdicts) {
      std::printf("%s  %s.%s  value=%.6g  bound=%.6g%s%s\n", v.pass ? "PASS" : "FAIL",
                  r.scenario.c_str(), v.name.c_str(), v.value, v.bound,
                  v.detail.empty() ? "" : "  ", v.detail.c_str());
      all = all && v.pass;
    }
    if (!r.note.empty()) std::printf("note  %s: %s\n", r.scenario.c_str(), r.note.c_str());
  }
  std::printf("%s written to %s/%s\n", suite ? "suite" : "report", opt.out.c_str(),
              suite ? "suite.json" : "report.json");
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for twisted cocycles over hyperbolic base dynamics"};
  app.require_subcommand(1);

  struct Verb {
    const char* name;
    const char* help;
    std::string fallback;
    std::vector<std::string> accepted;
    Options opt;
    CLI::App* cmd = nullptr;
  };
  std::vector<Verb> verbs = {
      {"certify", "fiber bunching certificate and adapted norm check", "certify",
       {"certify", "margin_sweep"}, {}, nullptr},
      {"holonomy", "stable holonomy identities, regularity and decay rate", "holonomy_rate",
       {"holonomy_rate", "holonomy_rate_torus"}, {}, nullptr},
      {"reconstruct", "transfer map recovery for a conjugated pair", "reconstruction",
       {"reconstruction"}, {}, nullptr},
      {"periodic", "periodic data comparison and mismatch detection", "periodic_mismatch",
       {"periodic_mismatch"}, {}, nullptr},
      {"closing", "shadowing bounds for the closing construction", "closing_shadowing",
       {"closing_shadowing"}, {}, nullptr},
      {"suite", "every scenario of a suite config in order", "suite", {"suite"}, {}, nullptr},
  };
  for (auto& v : verbs) {
    v.cmd = app.add_subcommand(v.name, v.help);
    attach_common(v.cmd, v.opt);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& v : verbs) {
      if (!v.cmd->parsed()) continue;
      tl::ExperimentConfig cfg = load(v.opt, v.fallback, v.accepted);
      std::vector<tl::Report> reports;
      if (cfg.scenario == "suite")
        reports = tl::run_suite(cfg);
      else
        reports.push_back(tl::run(cfg));
      return report_outcome(reports, v.opt, cfg.scenario == "suite");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 3;
}
