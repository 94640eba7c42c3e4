#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skyway/error.hpp"
#include "skyway/geometry.hpp"

namespace skyway {

enum class FormationPattern { Column, Front, Echelon, Vee, Diamond };

// Enumeration order doubles as the tie-break order.
inline constexpr std::array<FormationPattern, 5> kAllPatterns = {
    FormationPattern::Column, FormationPattern::Front, FormationPattern::Echelon,
    FormationPattern::Vee, FormationPattern::Diamond};

inline constexpr std::size_t kMaxSwarmSize = 9;

inline std::string_view to_string(FormationPattern p) {
  switch (p) {
    case FormationPattern::Column: return "Column";
    case FormationPattern::Front: return "Front";
    case FormationPattern::Echelon: return "Echelon";
    case FormationPattern::Vee: return "Vee";
    case FormationPattern::Diamond: return "Diamond";
  }
  return "?";
}

inline FormationPattern pattern_from_string(std::string_view name) {
  for (auto p : kAllPatterns)
    if (to_string(p) == name) return p;
  throw ConfigError("unknown formation pattern: " + std::string(name));
}

inline std::size_t pattern_index(FormationPattern p) { return static_cast<std::size_t>(p); }

// Leader-centred slot offset. `along` points along the heading (negative is
// behind the leader), `cross` is lateral (positive to the left).
struct SlotOffset {
  double along = 0.0;
  double cross = 0.0;

  friend bool operator==(const SlotOffset&, const SlotOffset&) = default;
};

inline std::vector<SlotOffset> slot_offsets(FormationPattern pattern, std::size_t n, double spacing) {
  if (n < 1 || n > kMaxSwarmSize) throw InvalidArgument("swarm size must be in [1, 9]");
  if (!(spacing > 0.0)) throw InvalidArgument("spacing must be > 0");

  std::vector<SlotOffset> out;
  out.reserve(n);
  const double diag = spacing / std::numbers::sqrt2;
  out.push_back({0.0, 0.0});
  for (std::size_t i = 1; i < n; ++i) {
    const double rank = static_cast<double>((i + 1) / 2);
    const double side = (i % 2 == 1) ? 1.0 : -1.0;
    const double k = static_cast<double>(i);
    switch (pattern) {
      case FormationPattern::Column:
        out.push_back({-k * spacing, 0.0});
        break;
      case FormationPattern::Front:
        out.push_back({0.0, side * rank * spacing});
        break;
      case FormationPattern::Echelon:
        out.push_back({-k * spacing, k * spacing});
        break;
      case FormationPattern::Vee:
        // Two trailing 45-degree arms, one spacing between neighbours on an arm.
        out.push_back({-rank * diag, side * rank * diag});
        break;
      case FormationPattern::Diamond: {
        static constexpr std::array<SlotOffset, kMaxSwarmSize> unit = {{
            {0, 0}, {1, 0}, {0, 1}, {0, -1}, {-1, 0}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
        out.push_back({unit[i].along * spacing, unit[i].cross * spacing});
        break;
      }
    }
  }
  return out;
}

inline double formation_width(FormationPattern pattern, std::size_t n, double spacing) {
  const auto slots = slot_offsets(pattern, n, spacing);
  auto [lo, hi] = std::minmax_element(slots.begin(), slots.end(),
                                      [](const SlotOffset& a, const SlotOffset& b) { return a.cross < b.cross; });
  return (hi->cross - lo->cross) + 2.0 * spacing;
}

// Widest lateral footprint over all five patterns.
inline double max_formation_width(std::size_t n, double spacing) {
  double w = 0.0;
  for (auto p : kAllPatterns) w = std::max(w, formation_width(p, n, spacing));
  return w;
}

// ---------------------------------------------------------------------------
// Swarm and wind

struct DroneSpec {
  std::string id;
  double payload = 0.0;           // kg
  double battery_capacity = 0.0;  // J
  double reserve_fraction = 0.1;

  double reserve() const { return reserve_fraction * battery_capacity; }
};

struct SwarmSpec {
  std::vector<DroneSpec> drones;
  double spacing = 2.0;       // m
  double cruise_speed = 5.0;  // m/s

  std::size_t size() const noexcept { return drones.size(); }
};

inline void validate_swarm(const SwarmSpec& swarm) {
  if (swarm.drones.empty() || swarm.drones.size() > kMaxSwarmSize)
    throw InvalidScene("swarm must have between 1 and 9 drones");
  if (!(swarm.spacing > 0.0)) throw InvalidScene("spacing must be > 0");
  if (!(swarm.cruise_speed > 0.0)) throw InvalidScene("cruise_speed must be > 0");
  std::vector<std::string> ids;
  for (const auto& d : swarm.drones) {
    if (d.id.empty()) throw InvalidScene("drone id is empty");
    if (!(d.payload >= 0.0)) throw InvalidScene("drone " + d.id + " payload must be >= 0");
    if (!(d.battery_capacity > 0.0)) throw InvalidScene("drone " + d.id + " battery_capacity must be > 0");
    if (!(d.reserve_fraction >= 0.0 && d.reserve_fraction < 1.0))
      throw InvalidScene("drone " + d.id + " reserve_fraction must be in [0, 1)");
    ids.push_back(d.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw InvalidScene("duplicate drone id");
}

struct WindInterval {
  double start = 0.0;
  double end = 0.0;
  Vec2 wind;
};

// Piecewise-constant wind; the last entry holds forever.
class WindSchedule {
public:
  struct Entry {
    double start_time = 0.0;
    Vec2 wind;
  };

  WindSchedule() : entries_{{0.0, {0.0, 0.0}}} {}

  explicit WindSchedule(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) entries_.push_back({0.0, {0.0, 0.0}});
    if (entries_.front().start_time != 0.0) throw InvalidScene("wind schedule must start at t=0");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!is_finite(entries_[i].wind)) throw InvalidScene("wind vector is not finite");
      if (i > 0 && !(entries_[i].start_time > entries_[i - 1].start_time))
        throw InvalidScene("wind schedule start times must be strictly increasing");
    }
  }

  static WindSchedule constant(Vec2 wind) { return WindSchedule({{0.0, wind}}); }

  const std::vector<Entry>& entries() const noexcept { return entries_; }

  Vec2 wind_at(double t) const {
    auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                               [](double v, const Entry& e) { return v < e.start_time; });
    return it == entries_.begin() ? entries_.front().wind : std::prev(it)->wind;
  }

  // Time of the last wind change; wind is constant from here on.
  double last_change() const { return entries_.back().start_time; }

  // Wind intervals with positive overlap with [t0, t1], clipped to it.
  std::vector<WindInterval> intervals(double t0, double t1) const {
    std::vector<WindInterval> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const double s = std::max(t0, entries_[i].start_time);
      const double e = std::min(t1, i + 1 < entries_.size() ? entries_[i + 1].start_time
                                                           : std::numeric_limits<double>::infinity());
      if (e > s) out.push_back({s, e, entries_[i].wind});
    }
    return out;
  }

private:
  std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Energy model

struct EnergyModelConfig {
  double base_power = 80.0;    // W
  double payload_coeff = 1.0;  // 1/kg
  // position_factors[pattern][slot]
  std::array<std::vector<double>, 5> position_factors;
  // wind_response[pattern]: (relative angle in degrees, factor per m/s), sorted by angle
  std::array<std::vector<std::pair<double, double>>, 5> wind_response;
};

inline void validate_energy_config(const EnergyModelConfig& cfg) {
  if (!(cfg.base_power > 0.0)) throw ConfigError("base_power must be > 0");
  if (!(cfg.payload_coeff >= 0.0)) throw ConfigError("payload_coeff must be >= 0");
  for (auto p : kAllPatterns) {
    const auto name = std::string(to_string(p));
    for (double f : cfg.position_factors[pattern_index(p)])
      if (!(f > 0.0)) throw ConfigError("position factor for " + name + " must be > 0");
    const auto& bins = cfg.wind_response[pattern_index(p)];
    if (bins.empty()) throw ConfigError("missing wind response for " + name);
    if (bins.front().first > 0.0 || bins.back().first < 180.0)
      throw ConfigError("wind response for " + name + " must cover [0, 180] degrees");
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (!(bins[i].second > 0.0)) throw ConfigError("wind factor for " + name + " must be > 0");
      if (i > 0 && !(bins[i].first > bins[i - 1].first))
        throw ConfigError("wind response angles for " + name + " must be increasing");
    }
  }
}

// Angle in [0, 180] degrees between the heading and the direction the wind
// blows from; 0 is a pure headwind.
inline double relative_wind_angle(Vec2 wind, Vec2 heading) {
  const double speed = norm(wind);
  const double hn = norm(heading);
  if (speed == 0.0 || hn == 0.0) return 0.0;
  const Vec2 source = (-1.0 / speed) * wind;
  const double c = std::clamp(dot(source, heading) / hn, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

inline double wind_factor(const EnergyModelConfig& cfg, FormationPattern pattern, double angle_deg) {
  const auto& bins = cfg.wind_response[pattern_index(pattern)];
  if (bins.empty()) throw ConfigError("missing wind response for " + std::string(to_string(pattern)));
  if (angle_deg <= bins.front().first) return bins.front().second;
  if (angle_deg >= bins.back().first) return bins.back().second;
  auto hi = std::upper_bound(bins.begin(), bins.end(), angle_deg,
                             [](double a, const std::pair<double, double>& b) { return a < b.first; });
  auto lo = std::prev(hi);
  const double u = (angle_deg - lo->first) / (hi->first - lo->first);
  return lo->second + u * (hi->second - lo->second);
}

inline double position_factor(const EnergyModelConfig& cfg, FormationPattern pattern, std::size_t slot) {
  const auto& factors = cfg.position_factors[pattern_index(pattern)];
  if (slot >= factors.size())
    throw ConfigError("no position factor for " + std::string(to_string(pattern)) + " slot " +
                      std::to_string(slot));
  return factors[slot];
}

inline double drone_power(const DroneSpec& drone, std::size_t slot, FormationPattern pattern, Vec2 wind,
                          Vec2 heading, const EnergyModelConfig& cfg) {
  const double theta = relative_wind_angle(wind, heading);
  return cfg.base_power * (1.0 + cfg.payload_coeff * drone.payload) * position_factor(cfg, pattern, slot) *
         (1.0 + wind_factor(cfg, pattern, theta) * norm(wind));
}

inline double max_drone_power(const SwarmSpec& swarm, FormationPattern pattern, Vec2 wind, Vec2 heading,
                              const EnergyModelConfig& cfg) {
  double worst = 0.0;
  for (std::size_t i = 0; i < swarm.size(); ++i)
    worst = std::max(worst, drone_power(swarm.drones[i], i, pattern, wind, heading, cfg));
  return worst;
}

// Pattern minimising the highest per-drone power; the first drone to run
// dry grounds the whole swarm.
inline FormationPattern best_formation(const SwarmSpec& swarm, Vec2 wind, Vec2 heading,
                                       const EnergyModelConfig& cfg) {
  FormationPattern best = kAllPatterns.front();
  double best_power = std::numeric_limits<double>::infinity();
  for (auto p : kAllPatterns) {
    const double power = max_drone_power(swarm, p, wind, heading, cfg);
    if (power < best_power) {
      best_power = power;
      best = p;
    }
  }
  return best;
}

// Per-drone energy for flying `length` meters in a fixed pattern, departing
// at `depart_time`.
inline std::vector<double> segment_energy(const SwarmSpec& swarm, double length, FormationPattern pattern,
                                          const WindSchedule& wind, double depart_time, Vec2 heading,
                                          const EnergyModelConfig& cfg) {
  if (!(length > 0.0)) throw InvalidArgument("segment length must be > 0");
  const double arrive = depart_time + length / swarm.cruise_speed;
  std::vector<double> energy(swarm.size(), 0.0);
  for (const auto& iv : wind.intervals(depart_time, arrive))
    for (std::size_t i = 0; i < swarm.size(); ++i)
      energy[i] += drone_power(swarm.drones[i], i, pattern, iv.wind, heading, cfg) * (iv.end - iv.start);
  return energy;
}

// ---------------------------------------------------------------------------
// JSON

inline EnergyModelConfig parse_energy_config(const nlohmann::json& doc) {
  EnergyModelConfig cfg;
  cfg.base_power = doc.at("base_power").get<double>();
  cfg.payload_coeff = doc.at("payload_coeff").get<double>();
  for (const auto& [name, slots] : doc.at("position_factors").items()) {
    auto& factors = cfg.position_factors[pattern_index(pattern_from_string(name))];
    std::map<std::size_t, double> by_slot;
    for (const auto& [slot, f] : slots.items()) by_slot[std::stoul(slot)] = f.get<double>();
    for (const auto& [slot, f] : by_slot) {
      if (slot != factors.size())
        throw ConfigError("position factors for " + name + " must be contiguous from slot 0");
      factors.push_back(f);
    }
  }
  for (const auto& [name, bins] : doc.at("wind_response").items()) {
    auto& table = cfg.wind_response[pattern_index(pattern_from_string(name))];
    for (const auto& bin : bins) table.emplace_back(bin.at(0).get<double>(), bin.at(1).get<double>());
  }
  validate_energy_config(cfg);
  return cfg;
}

inline nlohmann::ordered_json energy_config_to_json(const EnergyModelConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["base_power"] = cfg.base_power;
  doc["payload_coeff"] = cfg.payload_coeff;
  for (auto p : kAllPatterns) {
    nlohmann::ordered_json slots = nlohmann::ordered_json::object();
    const auto& factors = cfg.position_factors[pattern_index(p)];
    for (std::size_t i = 0; i < factors.size(); ++i) slots[std::to_string(i)] = factors[i];
    doc["position_factors"][std::string(to_string(p))] = slots;
  }
  for (auto p : kAllPatterns) {
    nlohmann::ordered_json bins = nlohmann::ordered_json::array();
    for (const auto& [angle, f] : cfg.wind_response[pattern_index(p)]) bins.push_back({angle, f});
    doc["wind_response"][std::string(to_string(p))] = bins;
  }
  return doc;
}

struct SwarmConfig {
  SwarmSpec swarm;
  WindSchedule wind;
};

inline SwarmConfig parse_swarm_config(const nlohmann::json& doc) {
  SwarmConfig out;
  for (const auto& jd : doc.at("drones")) {
    DroneSpec d;
    d.id = jd.at("id").get<std::string>();
    d.payload = jd.at("payload").get<double>();
    d.battery_capacity = jd.at("battery_capacity").get<double>();
    d.reserve_fraction = jd.value("reserve_fraction", 0.1);
    out.swarm.drones.push_back(std::move(d));
  }
  out.swarm.spacing = doc.value("spacing", 2.0);
  out.swarm.cruise_speed = doc.value("cruise_speed", 5.0);
  validate_swarm(out.swarm);
  std::vector<WindSchedule::Entry> entries;
  if (doc.contains("wind"))
    for (const auto& w : doc.at("wind"))
      entries.push_back({w.at(0).get<double>(), {w.at(1).get<double>(), w.at(2).get<double>()}});
  out.wind = WindSchedule(std::move(entries));
  return out;
}

}  // namespace skyway
