#include "nhqc/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace nhqc;

int main(int argc, char** argv) {
  CLI::App app{"holonomic Lambda-system gate synthesis and robustness benchmarks"};
  app.require_subcommand(1);

  std::string config, preset, out;
  int workers = 0;
  std::uint64_t seed = 12345;
  auto add_common = [&](CLI::App* sc) {
    auto* c = sc->add_option("--config", config, "scenario config (JSON)");
    auto* p = sc->add_option("--preset", preset, "bundled preset name");
    c->excludes(p);
    sc->add_option("--out", out, "output directory (default $NHQC_OUT_DIR/<name> or ./out/<name>)");
    sc->add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sc->add_option("--seed", seed, "seed for randomized restarts");
  };
  auto* synth = app.add_subcommand("synth", "synthesize a pulse and run the holonomy verifiers");
  auto* simulate = app.add_subcommand("simulate", "Lindblad simulation, average fidelity and F(t/tau)");
  auto* sweep = app.add_subcommand("sweep", "robustness sweep over beta (and epsilon)");
  auto* optimize = app.add_subcommand("optimize", "minimize the SSSP sensitivity");
  for (auto* sc : {synth, simulate, sweep, optimize}) add_common(sc);
  auto* report = app.add_subcommand("report", "collate a run directory into report.md");
  std::string run_dir;
  report->add_option("dir", run_dir, "run directory");
  report->add_option("--out", out, "run directory (alternative to the positional argument)");
  auto* presets = app.add_subcommand("presets", "list bundled presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  return guarded([&]() -> int {
    if (presets->parsed()) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return exit_ok;
    }
    if (report->parsed()) {
      const std::string d = !run_dir.empty() ? run_dir : out;
      if (d.empty()) throw ConfigError("report: give a run directory");
      return cmd_report(d);
    }
    if (config.empty() && preset.empty()) throw ConfigError("need --config or --preset");
    const Scenario s = !config.empty() ? load_scenario(config) : load_preset(preset);
    RunOptions o;
    o.out_dir = resolve_out_dir(out, s);
    o.workers = workers;
    o.seed = seed;
    int rc = exit_ok;
    if (synth->parsed()) rc = cmd_synth(s, o);
    if (simulate->parsed()) rc = cmd_simulate(s, o);
    if (sweep->parsed()) rc = cmd_sweep(s, o);
    if (optimize->parsed()) rc = cmd_optimize(s, o);
    std::cerr << "output: " << o.out_dir.string() << "\n";
    return rc;
  });
}
