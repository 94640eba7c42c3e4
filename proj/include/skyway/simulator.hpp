#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skyway/error.hpp"
#include "skyway/formation.hpp"
#include "skyway/network.hpp"
#include "skyway/planner.hpp"

namespace skyway {

enum class SimPhase { Cruise, Transition, Recharging, Done };

inline std::string_view to_string(SimPhase p) {
  switch (p) {
    case SimPhase::Cruise: return "Cruise";
    case SimPhase::Transition: return "Transition";
    case SimPhase::Recharging: return "Recharging";
    case SimPhase::Done: return "Done";
  }
  return "?";
}

struct SwarmState {
  double time = 0.0;
  Point3 leader;
  Vec2 heading{1.0, 0.0};
  FormationPattern pattern = FormationPattern::Column;
  std::vector<Point3> drone_positions;
  std::vector<double> batteries;
  SimPhase phase = SimPhase::Cruise;
  double transition_progress = 0.0;  // meaningful in Transition only
};

enum class EventKind {
  Depart,
  Arrive,
  FormationChangeStart,
  FormationChangeEnd,
  RechargeStart,
  RechargeEnd,
  BatteryWarning,
  Done
};

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Depart: return "Depart";
    case EventKind::Arrive: return "Arrive";
    case EventKind::FormationChangeStart: return "FormationChangeStart";
    case EventKind::FormationChangeEnd: return "FormationChangeEnd";
    case EventKind::RechargeStart: return "RechargeStart";
    case EventKind::RechargeEnd: return "RechargeEnd";
    case EventKind::BatteryWarning: return "BatteryWarning";
    case EventKind::Done: return "Done";
  }
  return "?";
}

// Fields not used by an event kind stay empty.
struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::Done;
  int leg = -1;
  int batch = -1;
  std::string node;
  std::string from;
  std::string to;
  std::string formation;
  std::string drone;
  std::vector<std::string> drones;
  double duration = 0.0;
  double fraction = 0.0;
};

struct SimTrace {
  std::vector<SimEvent> events;
  std::vector<SwarmState> samples;
  std::vector<std::vector<double>> leg_energy;  // simulated J per leg per drone
};

struct SimOptions {
  double dt = 0.1;
  double transition_speed = 1.0;   // m/s at which drones slide between slots
  double warning_fraction = 0.2;
  bool record_samples = true;
};

namespace detail {

inline Point3 place(const Point3& leader, Vec2 heading, const SlotOffset& off) {
  const Vec2 left{-heading.y, heading.x};
  return {leader.x + off.along * heading.x + off.cross * left.x,
          leader.y + off.along * heading.y + off.cross * left.y, leader.z};
}

inline Point3 lerp(const Point3& a, const Point3& b, double u) {
  return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y), a.z + u * (b.z - a.z)};
}

}  // namespace detail

// Fixed-step replay of a plan. Steps are cut at wind changes and formation
// boundaries so power is constant within each step; during a transition the
// destination pattern is billed.
inline SimTrace simulate(const RoutePlan& plan, const SkywayNetwork& net, const SwarmSpec& swarm,
                         const WindSchedule& wind, const EnergyModelConfig& cfg, const SimOptions& options = {}) {
  if (!(options.dt > 0.0)) throw InvalidArgument("dt must be > 0");
  validate_swarm(swarm);
  const std::size_t n = swarm.size();

  SimTrace trace;
  trace.leg_energy.assign(plan.legs.size(), std::vector<double>(n, 0.0));
  std::vector<double> battery(n);
  for (std::size_t i = 0; i < n; ++i) battery[i] = swarm.drones[i].battery_capacity;
  std::vector<bool> warned(n, false);

  FormationPattern active = plan.legs.empty() ? FormationPattern::Column : plan.legs.front().formation_plan.front().pattern;
  std::vector<SlotOffset> offsets = slot_offsets(active, n, swarm.spacing);
  Vec2 heading{1.0, 0.0};
  Point3 leader = plan.legs.empty() ? net.node(plan.src).rooftop() : net.node(plan.legs.front().from).rooftop();

  bool transitioning = false;
  double trans_start = 0.0, trans_end = 0.0;
  std::vector<SlotOffset> trans_from, trans_to;

  auto event = [&](double t, EventKind kind) -> SimEvent& {
    trace.events.push_back({});
    trace.events.back().time = t;
    trace.events.back().kind = kind;
    return trace.events.back();
  };

  auto progress_at = [&](double t) {
    if (!transitioning) return 1.0;
    const double dur = trans_end - trans_start;
    return dur > 0.0 ? std::clamp((t - trans_start) / dur, 0.0, 1.0) : 1.0;
  };

  auto offsets_at = [&](double t) {
    if (!transitioning) return offsets;
    const double u = progress_at(t);
    std::vector<SlotOffset> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = {trans_from[i].along + u * (trans_to[i].along - trans_from[i].along),
                trans_from[i].cross + u * (trans_to[i].cross - trans_from[i].cross)};
    return out;
  };

  auto record = [&](double t, SimPhase phase, const std::vector<double>& bats) {
    if (!options.record_samples) return;
    SwarmState s;
    s.time = t;
    s.leader = leader;
    s.heading = heading;
    s.pattern = active;
    s.phase = phase;
    s.transition_progress = phase == SimPhase::Transition ? progress_at(t) : 0.0;
    for (const auto& off : offsets_at(t)) s.drone_positions.push_back(detail::place(leader, heading, off));
    s.batteries = bats;
    trace.samples.push_back(std::move(s));
  };

  auto end_transition = [&](double t) {
    transitioning = false;
    offsets = trans_to;
    event(t, EventKind::FormationChangeEnd).formation = std::string(to_string(active));
  };

  auto begin_transition = [&](double t, FormationPattern to) {
    trans_from = offsets_at(t);
    trans_to = slot_offsets(to, n, swarm.spacing);
    double max_move = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      max_move = std::max(max_move, std::hypot(trans_to[i].along - trans_from[i].along,
                                               trans_to[i].cross - trans_from[i].cross));
    auto& ev = event(t, EventKind::FormationChangeStart);
    ev.from = std::string(to_string(active));
    ev.to = std::string(to_string(to));
    ev.duration = max_move / options.transition_speed;
    active = to;
    transitioning = true;
    trans_start = t;
    trans_end = t + ev.duration;
    if (ev.duration <= 0.0) end_transition(t);
  };

  double clock = 0.0;
  for (std::size_t k = 0; k < plan.legs.size(); ++k) {
    const RouteLeg& leg = plan.legs[k];
    const SkywayNode& a = net.node(leg.from);
    const SkywayNode& b = net.node(leg.to);
    const Point3 pa = a.rooftop(), pb = b.rooftop();
    heading = leg_heading(a, b);
    leader = pa;
    const double span = leg.arrive - leg.depart;

    auto& dep = event(leg.depart, EventKind::Depart);
    dep.leg = static_cast<int>(k);
    dep.from = leg.from;
    dep.to = leg.to;
    dep.formation = std::string(to_string(leg.pattern_at(leg.depart)));
    if (leg.pattern_at(leg.depart) != active) begin_transition(leg.depart, leg.pattern_at(leg.depart));

    // Fixed dt grid from departure, with extra cuts where the wind or the
    // planned formation changes so each piece has constant power.
    std::vector<std::pair<double, bool>> cuts;  // (time, on the dt grid)
    for (std::size_t j = 0;; ++j) {
      const double t = leg.depart + static_cast<double>(j) * options.dt;
      if (j > 0 && t >= leg.arrive - 1e-9) break;
      cuts.push_back({t, true});
    }
    for (const auto& fc : leg.formation_plan)
      if (fc.start > leg.depart && fc.start < leg.arrive) cuts.push_back({fc.start, false});
    for (const auto& iv : wind.intervals(leg.depart, leg.arrive))
      if (iv.start > leg.depart) cuts.push_back({iv.start, false});
    std::sort(cuts.begin(), cuts.end(), [](const auto& x, const auto& y) {
      return x.first < y.first || (x.first == y.first && x.second > y.second);
    });
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](const auto& x, const auto& y) { return x.first == y.first; }),
               cuts.end());

    for (std::size_t j = 0; j < cuts.size(); ++j) {
      const double t = cuts[j].first;
      if (j > 0) {
        const FormationPattern wanted = leg.pattern_at(t);
        if (wanted != active) begin_transition(t, wanted);
      }
      if (transitioning && trans_end > t && trans_end < leg.arrive) {
        auto at = std::lower_bound(cuts.begin() + static_cast<std::ptrdiff_t>(j) + 1, cuts.end(), trans_end,
                                   [](const auto& c, double v) { return c.first < v; });
        if (at == cuts.end() || at->first != trans_end) cuts.insert(at, {trans_end, false});
      }
      const double t_next = j + 1 < cuts.size() ? cuts[j + 1].first : leg.arrive;
      const double step = t_next - t;
      leader = detail::lerp(pa, pb, span > 0.0 ? (t - leg.depart) / span : 1.0);
      if (cuts[j].second) record(t, transitioning ? SimPhase::Transition : SimPhase::Cruise, battery);

      const Vec2 w = wind.wind_at(t);
      for (std::size_t i = 0; i < n; ++i) {
        const double e = drone_power(swarm.drones[i], i, active, w, heading, cfg) * step;
        battery[i] -= e;
        trace.leg_energy[k][i] += e;
        if (battery[i] < 0.0) throw SimulationFault(swarm.drones[i].id, t_next);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (warned[i] || battery[i] >= options.warning_fraction * swarm.drones[i].battery_capacity) continue;
        warned[i] = true;
        auto& ev = event(t_next, EventKind::BatteryWarning);
        ev.drone = swarm.drones[i].id;
        ev.fraction = battery[i] / swarm.drones[i].battery_capacity;
      }
      if (transitioning && t_next >= trans_end - 1e-12) end_transition(t_next);
    }
    leader = pb;
    if (transitioning) end_transition(leg.arrive);
    auto& arr = event(leg.arrive, EventKind::Arrive);
    arr.leg = static_cast<int>(k);
    arr.node = leg.to;
    clock = leg.arrive;

    auto stop = plan.stops.find(leg.to);
    if (stop == plan.stops.end() || stop->second.kind != StopKind::Recharge) continue;
    for (std::size_t bi = 0; bi < stop->second.batches.size(); ++bi) {
      const RechargeBatch& batch = stop->second.batches[bi];
      auto& rs = event(batch.start, EventKind::RechargeStart);
      rs.node = leg.to;
      rs.batch = static_cast<int>(bi);
      rs.drones = batch.drones;

      std::vector<std::size_t> members;
      for (const auto& id : batch.drones) {
        auto it = std::find_if(swarm.drones.begin(), swarm.drones.end(),
                               [&](const DroneSpec& d) { return d.id == id; });
        if (it == swarm.drones.end()) throw InvalidScene("recharge batch names unknown drone " + id);
        members.push_back(static_cast<std::size_t>(it - swarm.drones.begin()));
      }
      const std::vector<double> at_start = battery;
      const double duration = batch.end - batch.start;
      for (double t = batch.start; t < batch.end - 1e-12; t += options.dt) {
        std::vector<double> bats = battery;
        const double u = duration > 0.0 ? (t - batch.start) / duration : 1.0;
        for (std::size_t i : members)
          bats[i] = at_start[i] + u * (swarm.drones[i].battery_capacity - at_start[i]);
        record(t, SimPhase::Recharging, bats);
      }
      for (std::size_t i : members) battery[i] = swarm.drones[i].battery_capacity;
      auto& re = event(batch.end, EventKind::RechargeEnd);
      re.node = leg.to;
      re.batch = static_cast<int>(bi);
      re.drones = batch.drones;
      clock = batch.end;
    }
  }
  record(clock, SimPhase::Done, battery);
  event(clock, EventKind::Done);
  return trace;
}

inline std::string emit_events(const SimTrace& trace) {
  std::string out;
  for (const auto& ev : trace.events) {
    nlohmann::ordered_json j;
    j["t"] = ev.time;
    j["kind"] = std::string(to_string(ev.kind));
    switch (ev.kind) {
      case EventKind::Depart:
        j["leg"] = ev.leg;
        j["from"] = ev.from;
        j["to"] = ev.to;
        j["formation"] = ev.formation;
        break;
      case EventKind::Arrive:
        j["leg"] = ev.leg;
        j["node"] = ev.node;
        break;
      case EventKind::FormationChangeStart:
        j["from"] = ev.from;
        j["to"] = ev.to;
        j["duration"] = ev.duration;
        break;
      case EventKind::FormationChangeEnd:
        j["formation"] = ev.formation;
        break;
      case EventKind::RechargeStart:
      case EventKind::RechargeEnd:
        j["node"] = ev.node;
        j["batch"] = ev.batch;
        j["drones"] = ev.drones;
        break;
      case EventKind::BatteryWarning:
        j["drone"] = ev.drone;
        j["fraction"] = ev.fraction;
        break;
      case EventKind::Done:
        break;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

// t,drone_id,x,y,z,battery_j; one row per drone per sample.
inline std::string samples_csv(const SimTrace& trace, const SwarmSpec& swarm) {
  std::ostringstream out;
  out << "t,drone_id,x,y,z,battery_j\n";
  out << std::setprecision(12);
  for (const auto& s : trace.samples)
    for (std::size_t i = 0; i < s.drone_positions.size(); ++i)
      out << s.time << ',' << swarm.drones[i].id << ',' << s.drone_positions[i].x << ','
          << s.drone_positions[i].y << ',' << s.drone_positions[i].z << ',' << s.batteries[i] << '\n';
  return out.str();
}

}  // namespace skyway
