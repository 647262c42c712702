#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "amiroar/app/commands.hpp"

namespace app = amiroar::app;

int main(int argc, char** argv) {
  CLI::App cli{"AMI incident response testbed: simulation, detection and playbook-driven response"};
  cli.require_subcommand(1);

  std::string playbook;
  auto* validate = cli.add_subcommand("validate", "Check a CACAO playbook");
  validate->add_option("playbook", playbook, "Playbook JSON file")->required();

  app::SimulateOptions sim;
  std::string scenario;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> clock_scale, baseline_hours;
  auto* simulate = cli.add_subcommand("simulate", "Run a scenario end to end and write its artifacts");
  simulate->add_option("--scenario,scenario", scenario, "Scenario JSON file")->required();
  simulate->add_option("--out", out, "Artifact directory (default $AMI_ROAR_OUT, else out/<scenario>)");
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--clock-scale", clock_scale, "Virtual seconds per wall second; 0 runs unpaced");
  simulate->add_option("--baseline-hours", baseline_hours, "Manual response baseline for MTTR reductions");

  std::string capture;
  std::optional<std::string> model;
  auto* replay = cli.add_subcommand("replay", "Re-run detection over a recorded capture");
  replay->add_option("capture", capture, "capture.jsonl")->required();
  replay->add_option("--model", model, "Detector model (default: ndr_model.json next to the capture)");
  replay->add_option("--out", out, "Also write alerts.cef to this directory");

  std::optional<std::string> dir;
  double metrics_baseline = 2.0;
  auto* metrics = cli.add_subcommand("metrics", "MTTR table for an artifact directory");
  metrics->add_option("dir", dir, "Artifact directory");
  metrics->add_option("--out", out, "Artifact directory (alternative to the positional argument)");
  metrics->add_option("--baseline-hours", metrics_baseline, "Manual response baseline in hours")
      ->capture_default_str();

  std::optional<std::string> serve_scenario;
  std::string host = "127.0.0.1";
  int port = 10443;
  auto* serve = cli.add_subcommand("serve", "Serve the SDN switch API over HTTP");
  serve->add_option("--scenario", serve_scenario, "Register the scenario's hosts");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : 2;
  }

  if (*validate) return app::cmd_validate(playbook, std::cout, std::cerr);
  if (*simulate) {
    sim.scenario = scenario;
    sim.out = app::resolve_out_dir(out, std::filesystem::path("out") / std::filesystem::path(scenario).stem());
    sim.seed = seed;
    sim.clock_scale = clock_scale;
    sim.baseline_hours = baseline_hours;
    return app::cmd_simulate(sim, std::cout, std::cerr);
  }
  if (*replay) {
    std::optional<std::filesystem::path> m, o;
    if (model) m = *model;
    if (out) o = *out;
    return app::cmd_replay(capture, m, o, std::cout, std::cerr);
  }
  if (*metrics) {
    auto d = dir ? std::filesystem::path(*dir) : app::resolve_out_dir(out, "out");
    return app::cmd_metrics(d, metrics_baseline, std::cout, std::cerr);
  }
  std::optional<std::filesystem::path> sc;
  if (serve_scenario) sc = *serve_scenario;
  return app::cmd_serve(sc, host, port, std::cout, std::cerr);
}
