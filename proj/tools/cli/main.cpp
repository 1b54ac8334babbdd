#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

void add_common(CLI::App* app, dualmpc::cli::CommonOptions& common, std::vector<std::string>& sets) {
  app->add_option_function<std::string>(
         "-c,--config", [&](const std::string& p) { common.config_path = p; }, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app->add_option("--set", sets, "Override a config field, e.g. --set estimator.damping=3");
  app->add_option_function<int>(
      "--steps", [&](int v) { common.steps = v; }, "Number of closed-loop steps");
  app->add_flag_function(
      "--oracle", [&](std::int64_t) { common.oracle = true; }, "Record the full-solve minimiser p* per step");
  app->add_option_function<std::string>(
      "-o,--out", [&](const std::string& v) { common.out = v; }, "Output directory");
  app->add_option("-j,--jobs", common.jobs, "Parallel runs (0: all cores)");
}

void split_sets(const std::vector<std::string>& sets, dualmpc::cli::CommonOptions& common) {
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw dualmpc::cli::ConfigError("--set expects path=value, got \"" + s + "\"");
    common.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dualmpc::cli;
  CLI::App app{"Closed-loop bearing-only localisation with observability-seeking MPC"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::vector<std::string> run_sets;
  std::string sweep;
  auto* run = app.add_subcommand("run", "Run one mode for one seed or a seed sweep");
  add_common(run, run_opts.common, run_sets);
  run->add_option_function<std::string>(
         "-m,--mode", [&](const std::string& m) { run_opts.mode = m; }, "nominal-only | observability-seeking")
      ->check(CLI::IsMember({"nominal-only", "observability-seeking", "nominal", "active"}));
  run->add_option_function<std::uint64_t>(
      "-s,--seed", [&](std::uint64_t s) { run_opts.seed = s; }, "Noise seed");
  run->add_option("--seed-sweep", sweep, "Inclusive seed range A..B");

  CompareOptions cmp_opts;
  std::vector<std::string> cmp_sets;
  std::string cmp_seeds = "0..19";
  auto* compare = app.add_subcommand("compare", "Run both modes on a seed range and write comparison.json");
  add_common(compare, cmp_opts.common, cmp_sets);
  compare->add_option("--seeds", cmp_seeds, "Inclusive seed range A..B")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigInvalid;
  }

  try {
    if (run->parsed()) {
      split_sets(run_sets, run_opts.common);
      if (!sweep.empty()) run_opts.sweep = parse_seed_range(sweep);
      return run_command(run_opts);
    }
    split_sets(cmp_sets, cmp_opts.common);
    cmp_opts.seeds = parse_seed_range(cmp_seeds);
    return compare_command(cmp_opts);
  } catch (const ConfigError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kConfigInvalid;
  }
}
