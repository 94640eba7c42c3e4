#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skyway/error.hpp"
#include "skyway/formation.hpp"
#include "skyway/network.hpp"

namespace skyway {

struct FormationChange {
  double start = 0.0;
  FormationPattern pattern = FormationPattern::Column;

  friend bool operator==(const FormationChange&, const FormationChange&) = default;
};

struct RouteLeg {
  std::string from;
  std::string to;
  std::vector<FormationChange> formation_plan;
  double depart = 0.0;
  double arrive = 0.0;
  std::vector<double> energy;  // J per drone

  FormationPattern pattern_at(double t) const {
    FormationPattern p = formation_plan.front().pattern;
    for (const auto& fc : formation_plan)
      if (fc.start <= t) p = fc.pattern;
    return p;
  }
};

struct RechargeBatch {
  std::vector<std::string> drones;
  double start = 0.0;
  double end = 0.0;
};

enum class StopKind { Flyover, Recharge };

struct Stop {
  StopKind kind = StopKind::Flyover;
  std::vector<RechargeBatch> batches;
};

struct RoutePlan {
  std::string src;
  std::string dst;
  std::vector<RouteLeg> legs;
  std::map<std::string, Stop> stops;
  double total_time = 0.0;
};

struct PlannerOptions {
  std::size_t quantization = 20;  // battery levels per drone used to bucket search labels
  double charge_rate = 100.0;     // W per pad
};

// Straight-line rooftop distance at cruise speed; never exceeds the time of
// any route since every edge is itself a straight segment.
inline double heuristic(const SkywayNetwork& net, const std::string& node, const std::string& dst,
                        double cruise_speed) {
  return distance3(net.node(node).rooftop(), net.node(dst).rooftop()) / cruise_speed;
}

struct RechargeSchedule {
  std::vector<RechargeBatch> batches;
  double total_time = 0.0;
};

// Drones needing charge are sorted by descending deficit and charged in
// consecutive batches of at most `pads`; a batch lasts as long as its
// largest deficit takes at `charge_rate`.
inline RechargeSchedule recharge_schedule(const SwarmSpec& swarm, const std::vector<double>& deficits, int pads,
                                          double charge_rate, double start_time = 0.0) {
  if (pads < 1) throw InfeasibleAction("recharge requires at least one pad");
  if (!(charge_rate > 0.0)) throw InvalidArgument("charge_rate must be > 0");
  if (deficits.size() != swarm.size()) throw InvalidArgument("deficit count does not match swarm size");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < deficits.size(); ++i) {
    if (deficits[i] < 0.0) throw InvalidArgument("deficits must be >= 0");
    if (deficits[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return deficits[a] > deficits[b]; });

  RechargeSchedule out;
  double t = start_time;
  for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(pads)) {
    const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(pads));
    RechargeBatch batch;
    batch.start = t;
    const double duration = deficits[order[first]] / charge_rate;
    for (std::size_t k = first; k < last; ++k) batch.drones.push_back(swarm.drones[order[k]].id);
    t += duration;
    out.total_time += duration;
    batch.end = t;
    out.batches.push_back(std::move(batch));
  }
  return out;
}

inline Vec2 leg_heading(const SkywayNode& from, const SkywayNode& to) {
  const Vec2 d = to.position - from.position;
  const double n = norm(d);
  return n > 0.0 ? (1.0 / n) * d : Vec2{1.0, 0.0};
}

struct LegProfile {
  std::vector<FormationChange> formation_plan;
  std::vector<double> energy;
  double arrive = 0.0;
};

// Flies one edge with the best formation for each wind interval crossed.
inline LegProfile adaptive_leg(const SwarmSpec& swarm, const SkywayNode& from, const SkywayNode& to,
                               double length, const WindSchedule& wind, double depart,
                               const EnergyModelConfig& cfg) {
  LegProfile leg;
  leg.arrive = depart + length / swarm.cruise_speed;
  leg.energy.assign(swarm.size(), 0.0);
  const Vec2 heading = leg_heading(from, to);
  for (const auto& iv : wind.intervals(depart, leg.arrive)) {
    const FormationPattern p = best_formation(swarm, iv.wind, heading, cfg);
    if (leg.formation_plan.empty() || leg.formation_plan.back().pattern != p)
      leg.formation_plan.push_back({iv.start, p});
    for (std::size_t i = 0; i < swarm.size(); ++i)
      leg.energy[i] += drone_power(swarm.drones[i], i, p, iv.wind, heading, cfg) * (iv.end - iv.start);
  }
  return leg;
}

namespace detail {

class NodeSet {
public:
  explicit NodeSet(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void insert(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool contains(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  bool subset_of(const NodeSet& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] & ~o.words_[w]) return false;
    return true;
  }

private:
  std::vector<std::uint64_t> words_;
};

enum class Action { Start, Traverse, Recharge };

struct Label {
  std::size_t node = 0;
  std::vector<double> battery;
  double elapsed = 0.0;
  NodeSet visited;
  std::ptrdiff_t parent = -1;
  Action action = Action::Start;
  bool alive = true;
  LegProfile leg;            // Traverse
  RechargeSchedule charge;   // Recharge
};

struct QueueEntry {
  double f;
  double h;
  std::size_t node;
  int action_rank;
  std::size_t seq;
  std::size_t label;
};

struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    // priority_queue pops the largest; invert for a min-heap.
    return std::tie(a.f, a.h, a.node, a.action_rank, a.seq) > std::tie(b.f, b.h, b.node, b.action_rank, b.seq);
  }
};

}  // namespace detail

struct PlannerStats {
  std::size_t labels_created = 0;
  std::size_t labels_expanded = 0;
  std::size_t labels_pruned = 0;
};

// Minimum-time simple route from src to dst. The search runs over labels
// (node, per-drone battery, elapsed time, visited set); a label is pruned when
// another label at the same node has no less battery for every drone, no
// later time and no more visited nodes. Time-shifted dominance is only used
// once the wind has stopped changing, since an earlier start may otherwise
// meet a different wind. Battery levels quantised to `quantization` steps
// index the per-node label buckets.
inline RoutePlan plan_route(const SkywayNetwork& net, const SwarmSpec& swarm, const WindSchedule& wind,
                            const EnergyModelConfig& cfg, const PlannerOptions& options, const std::string& src,
                            const std::string& dst, PlannerStats* stats = nullptr) {
  using namespace detail;
  validate_swarm(swarm);
  if (options.quantization < 1) throw InvalidArgument("quantization must be >= 1");
  if (!(options.charge_rate > 0.0)) throw InvalidArgument("charge_rate must be > 0");
  net.node(src);
  net.node(dst);

  RoutePlan plan;
  plan.src = src;
  plan.dst = dst;
  if (src == dst) return plan;

  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  for (const auto& [id, n] : net.nodes()) {
    index[id] = ids.size();
    ids.push_back(id);
  }
  std::vector<double> h(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) h[i] = heuristic(net, ids[i], dst, swarm.cruise_speed);

  const std::size_t n_drones = swarm.size();
  const std::size_t src_i = index.at(src);
  const std::size_t dst_i = index.at(dst);
  const double wind_settled = wind.last_change();

  auto levels = [&](const std::vector<double>& battery) {
    std::vector<int> out(n_drones);
    for (std::size_t i = 0; i < n_drones; ++i) {
      const double frac = battery[i] / swarm.drones[i].battery_capacity;
      out[i] = std::clamp(static_cast<int>(std::floor(frac * static_cast<double>(options.quantization))), 0,
                          static_cast<int>(options.quantization));
    }
    return out;
  };

  auto dominates = [&](const Label& a, const Label& b) {
    if (a.elapsed > b.elapsed) return false;
    if (a.elapsed < b.elapsed && a.elapsed < wind_settled) return false;
    for (std::size_t i = 0; i < n_drones; ++i)
      if (a.battery[i] < b.battery[i]) return false;
    return a.visited.subset_of(b.visited);
  };

  std::vector<Label> labels;
  std::vector<std::map<std::vector<int>, std::vector<std::size_t>>> buckets(ids.size());
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> open;
  std::size_t seq = 0;
  PlannerStats local;

  // Returns false when the label is dominated; otherwise files it and retires
  // anything it dominates.
  auto admit = [&](Label&& label) {
    const auto key = levels(label.battery);
    auto& node_buckets = buckets[label.node];
    for (auto& [lv, members] : node_buckets) {
      bool could_dominate_new = true, could_be_dominated = true;
      for (std::size_t i = 0; i < n_drones; ++i) {
        if (lv[i] < key[i]) could_dominate_new = false;
        if (lv[i] > key[i]) could_be_dominated = false;
      }
      if (could_dominate_new)
        for (std::size_t idx : members)
          if (labels[idx].alive && dominates(labels[idx], label)) {
            ++local.labels_pruned;
            return;
          }
      if (could_be_dominated)
        for (std::size_t idx : members)
          if (labels[idx].alive && dominates(label, labels[idx])) {
            labels[idx].alive = false;
            ++local.labels_pruned;
          }
    }
    const std::size_t id = labels.size();
    const int rank = label.action == Action::Recharge ? 1 : 0;
    const double hv = h[label.node];
    open.push({label.elapsed + hv, hv, label.node, rank, seq++, id});
    node_buckets[key].push_back(id);
    labels.push_back(std::move(label));
    ++local.labels_created;
  };

  {
    Label root;
    root.node = src_i;
    root.visited = NodeSet(ids.size());
    root.visited.insert(src_i);
    for (const auto& d : swarm.drones) root.battery.push_back(d.battery_capacity);
    admit(std::move(root));
  }

  std::ptrdiff_t goal = -1;
  std::set<std::string> reached;
  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    if (!labels[top.label].alive) continue;
    const std::size_t cur = top.label;
    reached.insert(ids[labels[cur].node]);
    if (labels[cur].node == dst_i) {
      goal = static_cast<std::ptrdiff_t>(cur);
      break;
    }
    ++local.labels_expanded;
    const std::size_t here_i = labels[cur].node;
    const SkywayNode& here = net.node(ids[here_i]);

    for (const auto& nb : net.neighbors(ids[here_i])) {
      const std::size_t next_i = index.at(nb.id);
      if (labels[cur].visited.contains(next_i)) continue;
      const SkywayNode& next = net.node(nb.id);
      LegProfile leg = adaptive_leg(swarm, here, next, nb.length, wind, labels[cur].elapsed, cfg);
      std::vector<double> battery = labels[cur].battery;
      bool feasible = true;
      for (std::size_t i = 0; i < n_drones; ++i) {
        battery[i] -= leg.energy[i];
        if (battery[i] < swarm.drones[i].reserve()) feasible = false;
      }
      if (!feasible) continue;
      Label child;
      child.node = next_i;
      child.battery = std::move(battery);
      child.elapsed = leg.arrive;
      child.visited = labels[cur].visited;
      child.visited.insert(next_i);
      child.parent = static_cast<std::ptrdiff_t>(cur);
      child.action = Action::Traverse;
      child.leg = std::move(leg);
      admit(std::move(child));
    }

    if (here_i != src_i && here.recharge_pads >= 1 && labels[cur].action != Action::Recharge) {
      std::vector<double> deficits(n_drones);
      bool needed = false;
      for (std::size_t i = 0; i < n_drones; ++i) {
        deficits[i] = swarm.drones[i].battery_capacity - labels[cur].battery[i];
        needed = needed || deficits[i] > 0.0;
      }
      if (needed) {
        Label child;
        child.node = here_i;
        child.charge = recharge_schedule(swarm, deficits, here.recharge_pads, options.charge_rate,
                                         labels[cur].elapsed);
        child.elapsed = child.charge.batches.back().end;
        for (const auto& d : swarm.drones) child.battery.push_back(d.battery_capacity);
        child.visited = labels[cur].visited;
        child.parent = static_cast<std::ptrdiff_t>(cur);
        child.action = Action::Recharge;
        admit(std::move(child));
      }
    }
  }
  if (stats) *stats = local;

  if (goal < 0) {
    std::ostringstream summary;
    std::string closest;
    double closest_h = std::numeric_limits<double>::infinity();
    for (const auto& id : reached)
      if (h[index.at(id)] < closest_h) {
        closest_h = h[index.at(id)];
        closest = id;
      }
    summary << "expanded " << local.labels_expanded << " labels; reached " << reached.size() << " of "
            << ids.size() << " nodes; closest reached node " << closest << " (" << closest_h
            << " s from " << dst << " at cruise speed)";
    throw NoRoute("no feasible route from " + src + " to " + dst, summary.str());
  }

  std::vector<std::size_t> chain;
  for (std::ptrdiff_t i = goal; i >= 0; i = labels[static_cast<std::size_t>(i)].parent)
    chain.push_back(static_cast<std::size_t>(i));
  std::reverse(chain.begin(), chain.end());

  for (std::size_t k = 1; k < chain.size(); ++k) {
    const Label& l = labels[chain[k]];
    const Label& prev = labels[chain[k - 1]];
    if (l.action == Action::Traverse) {
      RouteLeg leg;
      leg.from = ids[prev.node];
      leg.to = ids[l.node];
      leg.depart = prev.elapsed;
      leg.arrive = l.leg.arrive;
      leg.formation_plan = l.leg.formation_plan;
      leg.energy = l.leg.energy;
      plan.legs.push_back(std::move(leg));
      if (l.node != dst_i) plan.stops[ids[l.node]] = Stop{StopKind::Flyover, {}};
    } else if (l.action == Action::Recharge) {
      plan.stops[ids[l.node]] = Stop{StopKind::Recharge, l.charge.batches};
    }
  }
  plan.total_time = labels[static_cast<std::size_t>(goal)].elapsed;
  return plan;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json plan_to_json(const RoutePlan& plan) {
  using ojson = nlohmann::ordered_json;
  ojson legs = ojson::array();
  for (const auto& leg : plan.legs) {
    ojson formations = ojson::array();
    for (const auto& fc : leg.formation_plan) formations.push_back({fc.start, std::string(to_string(fc.pattern))});
    legs.push_back({{"from", leg.from},
                    {"to", leg.to},
                    {"depart", leg.depart},
                    {"arrive", leg.arrive},
                    {"formations", formations},
                    {"energy", leg.energy}});
  }
  ojson stops = ojson::object();
  for (const auto& [id, stop] : plan.stops) {
    if (stop.kind == StopKind::Flyover) {
      stops[id] = {{"kind", "Flyover"}};
      continue;
    }
    ojson batches = ojson::array();
    for (const auto& b : stop.batches) batches.push_back({b.drones, b.start, b.end});
    stops[id] = {{"kind", "Recharge"}, {"batches", batches}};
  }
  ojson doc;
  doc["src"] = plan.src;
  doc["dst"] = plan.dst;
  doc["legs"] = legs;
  doc["stops"] = stops;
  doc["total_time"] = plan.total_time;
  return doc;
}

inline RoutePlan plan_from_json(const nlohmann::json& doc) {
  RoutePlan plan;
  plan.src = doc.at("src").get<std::string>();
  plan.dst = doc.at("dst").get<std::string>();
  for (const auto& jl : doc.at("legs")) {
    RouteLeg leg;
    leg.from = jl.at("from").get<std::string>();
    leg.to = jl.at("to").get<std::string>();
    leg.depart = jl.at("depart").get<double>();
    leg.arrive = jl.at("arrive").get<double>();
    for (const auto& f : jl.at("formations"))
      leg.formation_plan.push_back({f.at(0).get<double>(), pattern_from_string(f.at(1).get<std::string>())});
    if (leg.formation_plan.empty()) throw InvalidScene("leg " + leg.from + "->" + leg.to + " has no formation");
    leg.energy = jl.at("energy").get<std::vector<double>>();
    plan.legs.push_back(std::move(leg));
  }
  for (const auto& [id, js] : doc.at("stops").items()) {
    Stop stop;
    const auto kind = js.at("kind").get<std::string>();
    if (kind == "Recharge") {
      stop.kind = StopKind::Recharge;
      for (const auto& jb : js.at("batches"))
        stop.batches.push_back({jb.at(0).get<std::vector<std::string>>(), jb.at(1).get<double>(),
                                jb.at(2).get<double>()});
    } else if (kind != "Flyover") {
      throw InvalidScene("unknown stop kind: " + kind);
    }
    plan.stops[id] = std::move(stop);
  }
  plan.total_time = doc.at("total_time").get<double>();
  return plan;
}

}  // namespace skyway
