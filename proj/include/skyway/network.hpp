#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skyway/error.hpp"
#include "skyway/geometry.hpp"

namespace skyway {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance3(const Point3& a, const Point3& b) {
  return std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y) + (b.z - a.z) * (b.z - a.z));
}

struct SkywayNode {
  std::string id;
  Point2 position;
  double height = 0.0;
  int recharge_pads = 0;

  Point3 rooftop() const { return {position.x, position.y, height}; }
};

// Undirected edge stored canonically with from < to.
struct SkywayEdge {
  std::string from;
  std::string to;
  double length = 0.0;

  friend bool operator==(const SkywayEdge&, const SkywayEdge&) = default;
};

struct Neighbor {
  std::string id;
  double length = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

class SkywayNetwork {
public:
  void add_node(SkywayNode node) {
    if (node.id.empty()) throw InvalidScene("node id is empty");
    const std::string id = node.id;
    if (!nodes_.emplace(id, std::move(node)).second) throw InvalidScene("duplicate node id: " + id);
    adjacency_[id];
  }

  // Inserts the undirected edge a-b; its length is the rooftop-to-rooftop 3D distance.
  void add_edge(const std::string& a, const std::string& b) {
    if (a == b) throw InvalidScene("self-loop at " + a);
    const double len = distance3(node(a).rooftop(), node(b).rooftop());
    if (!(len > 0.0)) throw InvalidScene("zero-length edge " + a + "-" + b);
    auto [lo, hi] = std::minmax(a, b);
    if (!edge_keys_.emplace(lo, hi).second) return;
    edges_.push_back({lo, hi, len});
    insert_sorted(adjacency_[a], {b, len});
    insert_sorted(adjacency_[b], {a, len});
  }

  bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }
  bool has_edge(const std::string& a, const std::string& b) const {
    auto [lo, hi] = std::minmax(a, b);
    return edge_keys_.count({lo, hi}) != 0;
  }

  const SkywayNode& node(const std::string& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw NotFound("unknown node: " + id);
    return it->second;
  }

  // Incident edges, sorted by neighbor id.
  const std::vector<Neighbor>& neighbors(const std::string& id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end()) throw NotFound("unknown node: " + id);
    return it->second;
  }

  const std::map<std::string, SkywayNode>& nodes() const noexcept { return nodes_; }

  // Edges sorted by (from, to).
  std::vector<SkywayEdge> edges() const {
    std::vector<SkywayEdge> out = edges_;
    std::sort(out.begin(), out.end(), [](const SkywayEdge& l, const SkywayEdge& r) {
      return std::tie(l.from, l.to) < std::tie(r.from, r.to);
    });
    return out;
  }

  std::size_t edge_count() const noexcept { return edges_.size(); }

private:
  static void insert_sorted(std::vector<Neighbor>& list, Neighbor n) {
    auto pos = std::lower_bound(list.begin(), list.end(), n,
                                [](const Neighbor& l, const Neighbor& r) { return l.id < r.id; });
    list.insert(pos, std::move(n));
  }

  std::map<std::string, SkywayNode> nodes_;
  std::map<std::string, std::vector<Neighbor>> adjacency_;
  std::vector<SkywayEdge> edges_;
  std::set<std::pair<std::string, std::string>> edge_keys_;
};

inline std::vector<Neighbor> neighbors(const SkywayNetwork& net, const std::string& id) {
  return net.neighbors(id);
}

struct Scene {
  std::vector<Building> buildings;
  std::vector<NoFlyZone> no_fly_zones;
};

inline void validate_scene(std::span<const Building> buildings) {
  if (buildings.empty()) throw InvalidScene("scene has no buildings");
  std::set<std::string> ids;
  for (const auto& b : buildings) {
    validate_building(b);
    if (!ids.insert(b.id).second) throw InvalidScene("duplicate building id: " + b.id);
  }
  for (std::size_t i = 0; i < buildings.size(); ++i)
    for (std::size_t j = i + 1; j < buildings.size(); ++j)
      if (buildings[i].center == buildings[j].center)
        throw InvalidScene("buildings " + buildings[i].id + " and " + buildings[j].id +
                           " share a center");
}

inline SkywayNetwork build_network(std::span<const Building> scene, std::span<const NoFlyZone> nfzs,
                                   double swarm_width) {
  validate_scene(scene);
  if (!(swarm_width > 0.0)) throw InvalidArgument("swarm width must be > 0");

  SkywayNetwork net;
  for (const auto& b : scene) net.add_node({b.id, b.center, b.height, b.recharge_pads});
  for (std::size_t i = 0; i < scene.size(); ++i)
    for (std::size_t j = i + 1; j < scene.size(); ++j)
      if (line_of_sight(scene[i], scene[j], scene, nfzs, swarm_width))
        net.add_edge(scene[i].id, scene[j].id);
  return net;
}

inline SkywayNetwork build_network(const Scene& scene, double swarm_width) {
  return build_network(scene.buildings, scene.no_fly_zones, swarm_width);
}

// ---------------------------------------------------------------------------
// Scene JSON

inline Scene parse_scene(const nlohmann::json& doc) {
  Scene scene;
  for (const auto& jb : doc.at("buildings")) {
    Building b;
    b.id = jb.at("id").get<std::string>();
    b.center = {jb.at("x").get<double>(), jb.at("y").get<double>()};
    b.radius = jb.at("radius").get<double>();
    b.height = jb.at("height").get<double>();
    b.recharge_pads = jb.value("recharge_pads", 0);
    scene.buildings.push_back(std::move(b));
  }
  validate_scene(scene.buildings);
  std::set<std::string> zone_ids;
  if (doc.contains("no_fly_zones")) {
    for (const auto& jz : doc.at("no_fly_zones")) {
      std::vector<Point2> verts;
      for (const auto& v : jz.at("vertices")) verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      std::string id = jz.at("id").get<std::string>();
      if (!zone_ids.insert(id).second) throw InvalidScene("duplicate no-fly zone id: " + id);
      try {
        scene.no_fly_zones.push_back({std::move(id), Polygon2(std::move(verts))});
      } catch (const InvalidArgument& e) {
        throw InvalidScene("no-fly zone " + jz.at("id").get<std::string>() + ": " + e.what());
      }
    }
  }
  return scene;
}

inline Scene parse_scene(const std::string& text) { return parse_scene(nlohmann::json::parse(text)); }

inline nlohmann::ordered_json scene_to_json(const Scene& scene) {
  nlohmann::ordered_json doc;
  doc["buildings"] = nlohmann::ordered_json::array();
  for (const auto& b : scene.buildings)
    doc["buildings"].push_back({{"id", b.id},
                                {"x", b.center.x},
                                {"y", b.center.y},
                                {"radius", b.radius},
                                {"height", b.height},
                                {"recharge_pads", b.recharge_pads}});
  doc["no_fly_zones"] = nlohmann::ordered_json::array();
  for (const auto& z : scene.no_fly_zones) {
    nlohmann::ordered_json verts = nlohmann::ordered_json::array();
    for (const auto& v : z.shape.vertices()) verts.push_back({v.x, v.y});
    doc["no_fly_zones"].push_back({{"id", z.id}, {"vertices", verts}});
  }
  return doc;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidScene("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scene load_scene(const std::string& path) { return parse_scene(read_text_file(path)); }

// ---------------------------------------------------------------------------
// GeoJSON

// Byte-stable FeatureCollection: node Points sorted by id, then edge
// LineStrings sorted by (from, to). Coordinates carry the rooftop height.
inline std::string export_geojson(const SkywayNetwork& net) {
  using ojson = nlohmann::ordered_json;
  ojson features = ojson::array();
  for (const auto& [id, n] : net.nodes()) {
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {n.position.x, n.position.y, n.height}}}},
                        {"properties", {{"id", id}, {"height", n.height}, {"recharge_pads", n.recharge_pads}}}});
  }
  for (const auto& e : net.edges()) {
    const auto& a = net.node(e.from);
    const auto& b = net.node(e.to);
    ojson coords = ojson::array();
    coords.push_back({a.position.x, a.position.y, a.height});
    coords.push_back({b.position.x, b.position.y, b.height});
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", {{"from", e.from}, {"to", e.to}, {"length", e.length}}}});
  }
  ojson doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(2) + "\n";
}

inline SkywayNetwork import_geojson(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  SkywayNetwork net;
  std::vector<std::pair<std::string, std::string>> pending;
  for (const auto& f : doc.at("features")) {
    const auto& geom = f.at("geometry");
    const auto& props = f.at("properties");
    const auto type = geom.at("type").get<std::string>();
    if (type == "Point") {
      const auto& c = geom.at("coordinates");
      net.add_node({props.at("id").get<std::string>(),
                    {c.at(0).get<double>(), c.at(1).get<double>()},
                    props.at("height").get<double>(),
                    props.at("recharge_pads").get<int>()});
    } else if (type == "LineString") {
      pending.emplace_back(props.at("from").get<std::string>(), props.at("to").get<std::string>());
    }
  }
  for (const auto& [a, b] : pending) net.add_edge(a, b);
  return net;
}

}  // namespace skyway
