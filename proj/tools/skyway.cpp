#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "skyway/commands.hpp"

namespace {

void add_inputs(CLI::App* cmd, skyway::commands::RunConfig& cfg) {
  cmd->add_option("--scene", cfg.scene_path, "Scene JSON (buildings, no-fly zones)")->required();
  cmd->add_option("--swarm", cfg.swarm_path, "Swarm + wind JSON")->required();
  cmd->add_option("--energy-config", cfg.energy_config_path, "Energy model JSON")
      ->default_val(std::string(SKYWAY_DATA_DIR) + "/default_energy.json");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace skyway::commands;
  CLI::App app{"Skyway swarm delivery planner"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string out_path, plan_path, samples_path;
  std::string data_dir = SKYWAY_DATA_DIR, out_dir = "demo_out";

  auto* build = app.add_subcommand("network-build", "Build the line-of-sight skyway network as GeoJSON");
  build->add_option("--scene", cfg.scene_path, "Scene JSON")->required();
  build->add_option("--swarm", cfg.swarm_path, "Swarm JSON (sets corridor width)")->required();
  build->add_option("--out", out_path, "Output GeoJSON path (stdout if omitted)");

  auto* plan = app.add_subcommand("plan", "Compute a minimum-time route plan");
  add_inputs(plan, cfg);
  plan->add_option("--src", cfg.src, "Source node id")->required();
  plan->add_option("--dst", cfg.dst, "Destination node id")->required();
  plan->add_option("--quantization", cfg.quantization, "Battery levels per drone")->default_val(20);
  plan->add_option("--charge-rate", cfg.charge_rate, "Charging power per pad (W)")->default_val(100.0);
  plan->add_flag("--allow-trivial", cfg.allow_trivial, "Accept src == dst");
  plan->add_option("--out", out_path, "Output plan JSON path (stdout if omitted)");

  auto* sim = app.add_subcommand("simulate", "Replay a plan and emit JSON-lines events");
  add_inputs(sim, cfg);
  sim->add_option("--plan", plan_path, "Plan JSON produced by `plan`")->required();
  sim->add_option("--dt", cfg.dt, "Simulation step (s)")->default_val(0.1);
  sim->add_option("--out", out_path, "Event log path (stdout if omitted)");
  sim->add_option("--samples", samples_path, "Optional CSV of per-drone position samples");

  auto* demo = app.add_subcommand("demo", "Run build, plan and simulate on the shipped CBD scene");
  demo->add_option("--data-dir", data_dir, "Directory holding the demo inputs")->default_val(data_dir);
  demo->add_option("--out-dir", out_dir, "Directory for generated artifacts")->default_val(out_dir);

  auto* gen = app.add_subcommand("gen-scene", "Write a random test scene");
  gen->add_option("--seed", cfg.seed, "Generator seed")->default_val(0);
  gen->add_option("--out", out_path, "Output scene JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  if (*build) return cmd_network_build(cfg.scene_path, cfg.swarm_path, out_path, std::cout, std::cerr);
  if (*plan) return cmd_plan(cfg, out_path, std::cout, std::cerr);
  if (*sim) return cmd_simulate(cfg, plan_path, out_path, samples_path, std::cout, std::cerr);
  if (*demo) return cmd_demo(data_dir, out_dir, std::cout, std::cerr);
  if (*gen) return cmd_gen_scene(cfg.seed, out_path, std::cout, std::cerr);
  return kInputError;
}
