#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "skyway/geometry.hpp"
#include "skyway/network.hpp"

namespace skyway {

struct SceneGenOptions {
  std::size_t max_buildings = 20;
  std::size_t max_no_fly_zones = 5;
  double extent = 200.0;  // square side, meters
};

inline std::string numbered_id(char prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 2) digits.insert(0, 2 - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

// Random city block: non-overlapping cylindrical buildings and convex
// no-fly polygons. Reproducible for a given seed on a given standard library.
inline Scene random_scene(std::uint64_t seed, const SceneGenOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, opt.extent);
  std::uniform_real_distribution<double> radius(3.0, 10.0);
  std::uniform_real_distribution<double> height(10.0, 80.0);
  std::uniform_int_distribution<int> pads(0, 3);

  Scene scene;
  const std::size_t n_buildings = std::uniform_int_distribution<std::size_t>(2, opt.max_buildings)(rng);
  for (std::size_t attempt = 0; scene.buildings.size() < n_buildings && attempt < 1000; ++attempt) {
    Building b{numbered_id('B', scene.buildings.size()), {coord(rng), coord(rng)}, radius(rng), height(rng), pads(rng)};
    bool clear = true;
    for (const auto& o : scene.buildings)
      if (distance(o.center, b.center) < o.radius + b.radius + 1.0) clear = false;
    if (clear) scene.buildings.push_back(std::move(b));
  }

  const std::size_t n_zones = std::uniform_int_distribution<std::size_t>(0, opt.max_no_fly_zones)(rng);
  std::uniform_real_distribution<double> zone_radius(5.0, 20.0);
  std::uniform_int_distribution<int> zone_sides(3, 6);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (std::size_t z = 0; z < n_zones; ++z) {
    const Point2 c{coord(rng), coord(rng)};
    const double r = zone_radius(rng);
    const int sides = zone_sides(rng);
    const double start = phase(rng);
    std::vector<Point2> verts;
    for (int k = 0; k < sides; ++k) {
      const double a = start + 2.0 * std::numbers::pi * (k + jitter(rng) * 0.5) / sides;
      verts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
    scene.no_fly_zones.push_back({numbered_id('Z', z), Polygon2(std::move(verts))});
  }
  return scene;
}

}  // namespace skyway
