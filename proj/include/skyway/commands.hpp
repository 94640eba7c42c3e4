#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "skyway/error.hpp"
#include "skyway/formation.hpp"
#include "skyway/network.hpp"
#include "skyway/planner.hpp"
#include "skyway/scene_gen.hpp"
#include "skyway/simulator.hpp"

namespace skyway::commands {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kNoRoute = 3,
  kStaleArtifact = 4,
  kSimulationFault = 5,
};

struct RunConfig {
  std::string scene_path;
  std::string energy_config_path;
  std::string swarm_path;
  std::string src;
  std::string dst;
  double dt = 0.1;
  std::size_t quantization = 20;
  double charge_rate = 100.0;
  std::uint64_t seed = 0;
  bool allow_trivial = false;
};

inline constexpr const char* kDemoSource = "B01";
inline constexpr const char* kDemoDestination = "B19";

// 64-bit FNV-1a over the raw file bytes, as 16 hex digits.
inline std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidScene("cannot write " + path);
  f << text;
}

struct Inputs {
  std::string scene_text, swarm_text, energy_text;
  Scene scene;
  SwarmConfig swarm;
  EnergyModelConfig energy;

  nlohmann::ordered_json hashes() const {
    return {{"scene", content_hash(scene_text)},
            {"swarm", content_hash(swarm_text)},
            {"energy", content_hash(energy_text)}};
  }
};

inline Inputs load_inputs(const RunConfig& cfg) {
  Inputs in;
  in.scene_text = read_text_file(cfg.scene_path);
  in.swarm_text = read_text_file(cfg.swarm_path);
  in.energy_text = read_text_file(cfg.energy_config_path);
  in.scene = parse_scene(in.scene_text);
  in.swarm = parse_swarm_config(nlohmann::json::parse(in.swarm_text));
  in.energy = parse_energy_config(nlohmann::json::parse(in.energy_text));
  return in;
}

// Corridors are sized for the widest of the five formations.
inline SkywayNetwork network_for(const Scene& scene, const SwarmSpec& swarm) {
  return build_network(scene, max_formation_width(swarm.size(), swarm.spacing));
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << '\n';
  } catch (const InvalidScene& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "error: configuration: " << e.what() << '\n';
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
  } catch (const NotFound& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

inline int cmd_network_build(const std::string& scene_path, const std::string& swarm_path,
                             const std::string& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scene scene = load_scene(scene_path);
    const SwarmConfig swarm = parse_swarm_config(nlohmann::json::parse(read_text_file(swarm_path)));
    const SkywayNetwork net = network_for(scene, swarm.swarm);
    if (net.edge_count() == 0) err << "warning: network has no line-of-sight edges\n";
    write_output(out_path, export_geojson(net), out);
    return static_cast<int>(kOk);
  });
}

inline int cmd_plan(const RunConfig& cfg, const std::string& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.src == cfg.dst && !cfg.allow_trivial) {
      err << "error: source equals destination (pass --allow-trivial to accept an empty plan)\n";
      return static_cast<int>(kInputError);
    }
    const Inputs in = load_inputs(cfg);
    const SkywayNetwork net = network_for(in.scene, in.swarm.swarm);
    RoutePlan plan;
    try {
      plan = plan_route(net, in.swarm.swarm, in.swarm.wind, in.energy, {cfg.quantization, cfg.charge_rate},
                        cfg.src, cfg.dst);
    } catch (const NoRoute& e) {
      err << "no route: " << e.what() << "\n  " << e.frontier() << '\n';
      return static_cast<int>(kNoRoute);
    }
    auto doc = plan_to_json(plan);
    doc["inputs"] = in.hashes();
    doc["options"] = {{"quantization", cfg.quantization}, {"charge_rate", cfg.charge_rate}};
    write_output(out_path, doc.dump(2) + "\n", out);

    if (!out_path.empty() && out_path != "-") {
      out << "total_time " << plan.total_time << " s, " << plan.legs.size() << " legs\n";
      for (const auto& [id, stop] : plan.stops) {
        out << "  " << id << ": " << (stop.kind == StopKind::Recharge ? "Recharge" : "Flyover");
        if (stop.kind == StopKind::Recharge) out << " (" << stop.batches.size() << " batches)";
        out << '\n';
      }
    }
    return static_cast<int>(kOk);
  });
}

inline int cmd_simulate(const RunConfig& cfg, const std::string& plan_path, const std::string& out_path,
                        const std::string& samples_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg);
    const auto doc = nlohmann::json::parse(read_text_file(plan_path));
    const auto expected = in.hashes();
    const auto& recorded = doc.at("inputs");
    for (const auto& key : {"scene", "swarm", "energy"}) {
      if (recorded.at(key).get<std::string>() != expected.at(key).get<std::string>()) {
        err << "error: plan was produced from a different " << key << " file\n";
        return static_cast<int>(kStaleArtifact);
      }
    }
    const RoutePlan plan = plan_from_json(doc);
    const SkywayNetwork net = network_for(in.scene, in.swarm.swarm);
    SimOptions opts;
    opts.dt = cfg.dt;
    opts.record_samples = !samples_path.empty();
    SimTrace trace;
    try {
      trace = simulate(plan, net, in.swarm.swarm, in.swarm.wind, in.energy, opts);
    } catch (const SimulationFault& e) {
      err << "simulation fault: " << e.what() << '\n';
      return static_cast<int>(kSimulationFault);
    }
    write_output(out_path, emit_events(trace), out);
    if (!samples_path.empty()) write_output(samples_path, samples_csv(trace, in.swarm.swarm), out);
    return static_cast<int>(kOk);
  });
}

inline int cmd_gen_scene(std::uint64_t seed, const std::string& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    write_output(out_path, scene_to_json(random_scene(seed)).dump(2) + "\n", out);
    return static_cast<int>(kOk);
  });
}

struct DemoPaths {
  std::string network;
  std::string plan;
  std::string events;
};

inline DemoPaths demo_paths(const std::string& out_dir) {
  namespace fs = std::filesystem;
  return {(fs::path(out_dir) / "network.geojson").string(), (fs::path(out_dir) / "plan.json").string(),
          (fs::path(out_dir) / "events.jsonl").string()};
}

inline RunConfig demo_config(const std::string& data_dir) {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.scene_path = (fs::path(data_dir) / "cbd_scene.json").string();
  cfg.swarm_path = (fs::path(data_dir) / "demo_swarm.json").string();
  cfg.energy_config_path = (fs::path(data_dir) / "default_energy.json").string();
  cfg.src = kDemoSource;
  cfg.dst = kDemoDestination;
  return cfg;
}

// build -> plan -> simulate on the shipped CBD scene.
inline int cmd_demo(const std::string& data_dir, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    err << "error: cannot create " << out_dir << ": " << ec.message() << '\n';
    return kInputError;
  }
  const RunConfig cfg = demo_config(data_dir);
  const DemoPaths paths = demo_paths(out_dir);
  if (int rc = cmd_network_build(cfg.scene_path, cfg.swarm_path, paths.network, out, err); rc != kOk) return rc;
  if (int rc = cmd_plan(cfg, paths.plan, out, err); rc != kOk) return rc;
  if (int rc = cmd_simulate(cfg, paths.plan, paths.events, "", out, err); rc != kOk) return rc;
  out << "wrote " << paths.network << ", " << paths.plan << ", " << paths.events << '\n';
  return kOk;
}

}  // namespace skyway::commands
