#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace twinbench {

/// Degeneracy tolerance shared by every planar predicate.
inline constexpr double kGeomEps = 1e-9;
inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline Vec2 unit_from_angle(double a) { return {std::cos(a), std::sin(a)}; }
/// Counter-clockwise perpendicular.
constexpr Vec2 left_normal(Vec2 v) { return {-v.y, v.x}; }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double a);
/// Signed shortest rotation taking `from` onto `to`, in (-pi, pi].
double angle_diff(double to, double from);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2&) const = default;
};

struct Segment {
  Vec2 a;
  Vec2 b;

  double length() const { return distance(a, b); }
  bool operator==(const Segment&) const = default;
};

using Polyline = std::vector<Vec2>;
using Polygon = std::vector<Vec2>;

/// Planar rectangle footprint; `length` runs along `heading`.
struct OrientedBox {
  Vec2 center;
  double heading = 0.0;
  double length = 1.0;
  double width = 1.0;

  Vec2 axis_long() const { return unit_from_angle(heading); }
  Vec2 axis_lat() const { return left_normal(axis_long()); }
  /// Corners in counter-clockwise order starting front-left.
  std::array<Vec2, 4> corners() const;
  /// Closed containment (boundary counts as inside).
  bool contains(Vec2 p) const;
  /// Evenly spaced points around the perimeter, corners first.
  std::vector<Vec2> perimeter_samples(int count) const;

  bool operator==(const OrientedBox&) const = default;
};

/// Closed-set overlap via the separating-axis test on the four edge normals.
bool obb_intersects(const OrientedBox& a, const OrientedBox& b);
/// Euclidean gap between two boxes; 0 when they overlap or touch.
double obb_distance(const OrientedBox& a, const OrientedBox& b);

/// Sign of cross(seg direction, p - seg.a). Throws GeometryError for a
/// degenerate segment.
int signed_side(const Segment& seg, Vec2 p);

/// Closed segment intersection test (touching counts).
bool segments_intersect(const Segment& s, const Segment& t);

/// Distance from p to the closed segment; `t_out` receives the foot parameter.
double point_segment_distance(Vec2 p, const Segment& seg, double* t_out = nullptr);
double segment_segment_distance(const Segment& s, const Segment& t);

struct PolylineProjection {
  double s = 0.0;         ///< arc length of the foot point
  double d = 0.0;         ///< signed lateral offset, left of direction positive
  double distance = 0.0;  ///< |d| up to rounding, kept for ranking
  std::size_t segment = 0;
};

double polyline_length(std::span<const Vec2> line);
std::vector<double> cumulative_lengths(std::span<const Vec2> line);
/// Point at arc length s, clamped to the polyline's ends.
Vec2 point_at_arclength(std::span<const Vec2> line, double s);
/// Closest point on the polyline; ties resolve to the smallest arc length.
PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p);
/// Resamples a polyline at a fixed arc-length spacing (endpoints kept).
Polyline resample_polyline(std::span<const Vec2> line, double spacing);

/// Closed point-in-polygon test (boundary counts as inside).
bool point_in_polygon(std::span<const Vec2> poly, Vec2 p);
bool polygon_is_simple(std::span<const Vec2> poly);
double polygon_area(std::span<const Vec2> poly);
Polygon convex_hull(std::vector<Vec2> points);

struct RayHit {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Nearest obstacle crossed by the open segment origin->target. Obstacles that
/// contain the origin are skipped.
std::optional<RayHit> ray_first_hit(Vec2 origin, Vec2 target,
                                    std::span<const OrientedBox> obstacles);

/// Rotation about the origin followed by a translation.
struct RigidTransform {
  double rotation = 0.0;
  Vec2 translation;

  Vec2 apply(Vec2 p) const;
  Pose2 apply(const Pose2& p) const;
  Segment apply(const Segment& s) const;
  Polyline apply(std::span<const Vec2> pts) const;
  double apply_heading(double h) const { return normalize_angle(h + rotation); }
};

}  // namespace twinbench
