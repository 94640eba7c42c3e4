#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skyway/error.hpp"

namespace skyway {

// Absolute tolerance for every boundary comparison (meters).
inline constexpr double kGeomEps = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

// Point2 doubles as a planar vector (wind, heading).
using Vec2 = Point2;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

// Closed-segment intersection up to kGeomEps.
inline bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return point_segment_distance(q1, p1, p2) <= kGeomEps ||
         point_segment_distance(q2, p1, p2) <= kGeomEps ||
         point_segment_distance(p1, q1, q2) <= kGeomEps ||
         point_segment_distance(p2, q1, q2) <= kGeomEps;
}

inline double signed_area(std::span<const Point2> pts) {
  double twice = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % pts.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

// Simple polygon with counter-clockwise vertex order. Clockwise input is
// reversed on construction; self-intersecting or degenerate input throws.
class Polygon2 {
public:
  explicit Polygon2(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw InvalidArgument("polygon needs at least 3 vertices");
    for (const auto& v : vertices_)
      if (!is_finite(v)) throw InvalidArgument("polygon vertex is not finite");
    const double area = signed_area(vertices_);
    if (std::abs(area) <= kGeomEps) throw InvalidArgument("polygon has zero area");
    if (area < 0) std::reverse(vertices_.begin(), vertices_.end());
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
        if (adjacent) continue;
        if (segments_intersect(edge_start(i), edge_end(i), edge_start(j), edge_end(j)))
          throw InvalidArgument("polygon is not simple");
      }
    }
  }

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  Point2 edge_start(std::size_t i) const { return vertices_[i]; }
  Point2 edge_end(std::size_t i) const { return vertices_[(i + 1) % vertices_.size()]; }
  double area() const { return signed_area(vertices_); }

  Point2 centroid() const {
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const Point2 a = edge_start(i), b = edge_end(i);
      const double w = a.x * b.y - b.x * a.y;
      cx += (a.x + b.x) * w;
      cy += (a.y + b.y) * w;
    }
    const double a6 = 6.0 * area();
    return {cx / a6, cy / a6};
  }

  double boundary_distance(Point2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i)
      best = std::min(best, point_segment_distance(p, edge_start(i), edge_end(i)));
    return best;
  }

  // Closed containment: boundary points (within kGeomEps) count as inside.
  bool contains(Point2 p) const {
    if (boundary_distance(p) <= kGeomEps) return true;
    bool inside = false;
    for (std::size_t i = 0; i < size(); ++i) {
      const Point2 a = edge_start(i), b = edge_end(i);
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x_at) inside = !inside;
      }
    }
    return inside;
  }

private:
  std::vector<Point2> vertices_;
};

struct Building {
  std::string id;
  Point2 center;
  double radius = 0.0;
  double height = 0.0;
  int recharge_pads = 0;
};

struct NoFlyZone {
  std::string id;
  Polygon2 shape;
};

inline void validate_building(const Building& b) {
  if (b.id.empty()) throw InvalidScene("building id is empty");
  if (!is_finite(b.center) || !std::isfinite(b.radius) || !std::isfinite(b.height))
    throw InvalidScene("building " + b.id + " has non-finite geometry");
  if (b.radius <= 0) throw InvalidScene("building " + b.id + " radius must be > 0");
  if (b.height <= 0) throw InvalidScene("building " + b.id + " height must be > 0");
  if (b.recharge_pads < 0) throw InvalidScene("building " + b.id + " has negative pad count");
}

// Rectangle of total width `width` centered on segment a->b, CCW.
inline Polygon2 corridor_polygon(Point2 a, Point2 b, double width) {
  const double len = distance(a, b);
  if (len <= 0.0 || !(width > 0.0)) throw InvalidArgument("degenerate corridor");
  const Vec2 dir = (1.0 / len) * (b - a);
  const Vec2 half = (0.5 * width) * Vec2{-dir.y, dir.x};
  return Polygon2({a - half, b - half, b + half, a + half});
}

inline bool circle_intersects_polygon(Point2 center, double radius, const Polygon2& poly) {
  return poly.contains(center) || poly.boundary_distance(center) <= radius + kGeomEps;
}

inline bool polygons_intersect(const Polygon2& p, const Polygon2& q) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j)
      if (segments_intersect(p.edge_start(i), p.edge_end(i), q.edge_start(j), q.edge_end(j)))
        return true;
  return q.contains(p.vertices().front()) || p.contains(q.vertices().front());
}

// Parameter in [0,1] of the point on a->b nearest to p.
inline double nearest_parameter(Point2 p, Point2 a, Point2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return 0.0;
  return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

// The swarm flies the straight rooftop-to-rooftop line; a candidate blocks it
// when its roof rises above that line at the candidate's nearest along-track
// position.
inline bool blocks_vertical(const Building& candidate, const Building& a, const Building& b) {
  const double t = nearest_parameter(candidate.center, a.center, b.center);
  const double line_height = a.height + t * (b.height - a.height);
  return candidate.height > line_height + kGeomEps;
}

inline bool line_of_sight(const Building& a, const Building& b, std::span<const Building> scene,
                          std::span<const NoFlyZone> nfzs, double width) {
  const Polygon2 corridor = corridor_polygon(a.center, b.center, width);
  for (const auto& zone : nfzs)
    if (polygons_intersect(corridor, zone.shape)) return false;
  for (const auto& other : scene) {
    if (other.id == a.id || other.id == b.id) continue;
    if (!circle_intersects_polygon(other.center, other.radius, corridor)) continue;
    if (blocks_vertical(other, a, b)) return false;
  }
  return true;
}

}  // namespace skyway
