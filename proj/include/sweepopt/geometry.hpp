#pragma once

// Planar primitives for convex workspaces with circular obstacles, the
// diameter (altitude) function, and the minimum-sum-of-altitudes choice of
// sweep direction.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sweepopt/errors.hpp"

namespace sweepopt {

/// Tolerance for convexity and containment tests, in field units.
inline constexpr double kGeomTol = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Convex polygon, counterclockwise vertex order.
struct Polygon {
  std::vector<Point2> vertices;

  std::size_t size() const { return vertices.size(); }
  Point2 edge(std::size_t i) const {
    return vertices[(i + 1) % vertices.size()] - vertices[i];
  }
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct CircleObstacle {
  Point2 center;
  double radius = 0.0;

  bool contains(Point2 p) const { return distance(p, center) < radius; }
  friend bool operator==(const CircleObstacle&, const CircleObstacle&) = default;
};

/// Direction of slice travel. Successive slices advance along the normal
/// (-sin theta, cos theta).
class SweepDirection {
 public:
  SweepDirection() = default;
  explicit SweepDirection(double theta) : theta_(normalize(theta)) {}

  double theta() const { return theta_; }
  double c() const { return std::cos(theta_); }
  double s() const { return std::sin(theta_); }
  Point2 travel() const { return {c(), s()}; }
  Point2 normal() const { return {-s(), c()}; }

  /// Maps any angle to [0, pi); angles within 1e-12 of pi wrap to 0.
  static double normalize(double theta) {
    constexpr double pi = std::numbers::pi;
    double t = std::fmod(theta, pi);
    if (t < 0.0) t += pi;
    if (t >= pi - 1e-12) t = 0.0;
    return t;
  }

  friend bool operator==(const SweepDirection&, const SweepDirection&) = default;

 private:
  double theta_ = 0.0;
};

inline double polygon_area(const Polygon& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    twice += cross(poly.vertices[i], poly.vertices[(i + 1) % poly.size()]);
  }
  return 0.5 * twice;
}

/// Returns a description of the first violated polygon invariant, if any.
inline std::optional<std::string> polygon_defect(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return "polygon needs at least 3 vertices";
  for (const auto& v : poly.vertices) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) return "polygon vertex is not finite";
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (norm(poly.edge(i)) <= kGeomTol) return "polygon has a repeated vertex";
    if (cross(poly.edge(i), poly.edge((i + 1) % n)) < -kGeomTol) {
      return "polygon is not convex and counterclockwise";
    }
  }
  // A convex turn sequence can still wind more than once.
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly.edge(i);
    const Point2 b = poly.edge((i + 1) % n);
    turning += std::atan2(cross(a, b), dot(a, b));
  }
  if (std::abs(turning - 2.0 * std::numbers::pi) > 1e-6) return "polygon is not simple";
  if (polygon_area(poly) <= kGeomTol) return "polygon has zero area";
  return std::nullopt;
}

/// Closed containment test for a convex CCW polygon.
inline bool contains(const Polygon& poly, Point2 p, double tol = kGeomTol) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 e = poly.edge(i);
    if (cross(e, p - poly.vertices[i]) < -tol * std::max(1.0, norm(e))) return false;
  }
  return true;
}

/// Signed distance from p to the boundary, positive inside a convex CCW polygon.
inline double inset_distance(const Polygon& poly, Point2 p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 e = poly.edge(i);
    d = std::min(d, cross(e, p - poly.vertices[i]) / norm(e));
  }
  return d;
}

/// Andrew's monotone chain; collinear boundary points are dropped.
inline Polygon convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw DegenerateInput("convex hull needs at least 3 distinct points");

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  auto turn = [&](std::size_t lo, Point2 p) {
    while (k >= lo && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= kGeomTol) --k;
    hull[k++] = p;
  };
  for (const auto& p : pts) turn(2, p);
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) turn(lower, *it);
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateInput("all points are collinear");
  return Polygon{std::move(hull)};
}

/// Extent of the vertex set along the advance normal of `dir`.
inline double diameter(const Polygon& poly, const SweepDirection& dir) {
  if (poly.vertices.empty()) return 0.0;
  const Point2 n = dir.normal();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : poly.vertices) {
    const double p = dot(v, n);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return hi - lo;
}

/// Sum of altitudes S(theta). A circle's altitude is 2r in every direction.
inline double msa_cost(const Polygon& boundary, std::span<const CircleObstacle> obstacles,
                       const SweepDirection& dir) {
  double s = diameter(boundary, dir);
  for (const auto& o : obstacles) s += 2.0 * o.radius;
  return s;
}

struct SweepChoice {
  SweepDirection direction;
  double cost = 0.0;
};

/// Minimizes S(theta) over the boundary edge directions. Circles add a
/// constant, so they contribute no candidates. Ties go to the smaller angle.
inline SweepChoice optimal_sweep_direction(const Polygon& boundary,
                                           std::span<const CircleObstacle> obstacles) {
  std::vector<double> candidates;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const Point2 e = boundary.edge(i);
    candidates.push_back(SweepDirection::normalize(std::atan2(e.y, e.x)));
  }
  std::sort(candidates.begin(), candidates.end());

  SweepChoice best{SweepDirection(0.0), std::numeric_limits<double>::infinity()};
  for (double theta : candidates) {
    const SweepDirection dir(theta);
    const double s = msa_cost(boundary, obstacles, dir);
    if (s < best.cost - kGeomTol) best = {dir, s};
  }
  return best;
}

/// Sweep-aligned coordinates: local x is the travel coordinate, local y the
/// advance coordinate measured from the polygon's lowest extent.
struct SweepFrame {
  SweepDirection direction;
  double advance_origin = 0.0;

  static SweepFrame for_polygon(const Polygon& poly, const SweepDirection& dir) {
    const Point2 n = dir.normal();
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& v : poly.vertices) lo = std::min(lo, dot(v, n));
    return {dir, lo};
  }

  Point2 to_local(Point2 p) const {
    return {dot(p, direction.travel()), dot(p, direction.normal()) - advance_origin};
  }
  Point2 to_global(Point2 local) const {
    return local.x * direction.travel() + (local.y + advance_origin) * direction.normal();
  }
  /// Rotates a vector (velocity, control) from local to global axes.
  Point2 rotate_to_global(Point2 v) const {
    return v.x * direction.travel() + v.y * direction.normal();
  }
  CircleObstacle to_local(const CircleObstacle& o) const { return {to_local(o.center), o.radius}; }
};

/// Intersection of the line local y = a with the polygon,
/// as the travel-coordinate interval, or nothing if the line misses it.
inline std::optional<std::pair<double, double>> chord(const Polygon& poly, const SweepFrame& frame,
                                                      double a) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = frame.to_local(poly.vertices[i]);
    const Point2 q = frame.to_local(poly.vertices[(i + 1) % n]);
    const double dp = p.y - a;
    const double dq = q.y - a;
    if (std::abs(dp) <= kGeomTol) {
      lo = std::min(lo, p.x);
      hi = std::max(hi, p.x);
    }
    if ((dp < -kGeomTol && dq > kGeomTol) || (dp > kGeomTol && dq < -kGeomTol)) {
      const double x = p.x + (q.x - p.x) * dp / (dp - dq);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (lo > hi) return std::nullopt;
  return std::pair{lo, hi};
}

/// Obstacles whose circle meets the closed strip lower <= local y <= upper.
inline std::vector<CircleObstacle> obstacles_in_corridor(std::span<const CircleObstacle> obstacles,
                                                         std::pair<double, double> corridor,
                                                         const SweepFrame& frame) {
  std::vector<CircleObstacle> out;
  for (const auto& o : obstacles) {
    const double y = frame.to_local(o.center).y;
    const double gap = std::max({corridor.first - y, y - corridor.second, 0.0});
    if (gap <= o.radius + kGeomTol) out.push_back(o);
  }
  return out;
}

}  // namespace sweepopt
