#include "twinbench/geometry.hpp"

#include <algorithm>
#include <limits>

#include "twinbench/errors.hpp"

namespace twinbench {

double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

double angle_diff(double to, double from) { return normalize_angle(to - from); }

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 u = axis_long() * (0.5 * length);
  const Vec2 v = axis_lat() * (0.5 * width);
  return {center + u + v, center - u + v, center - u - v, center + u - v};
}

bool OrientedBox::contains(Vec2 p) const {
  const Vec2 r = p - center;
  return std::abs(dot(r, axis_long())) <= 0.5 * length + kGeomEps &&
         std::abs(dot(r, axis_lat())) <= 0.5 * width + kGeomEps;
}

std::vector<Vec2> OrientedBox::perimeter_samples(int count) const {
  const auto c = corners();
  std::vector<Vec2> out(c.begin(), c.end());
  if (count <= 4) {
    out.resize(static_cast<std::size_t>(std::max(count, 0)));
    return out;
  }
  // Remaining samples spread over the edges by arc length.
  const double perimeter = 2.0 * (length + width);
  const int extra = count - 4;
  for (int k = 0; k < extra; ++k) {
    double s = perimeter * (k + 0.5) / extra;
    for (int e = 0; e < 4; ++e) {
      const Vec2 a = c[static_cast<std::size_t>(e)];
      const Vec2 b = c[static_cast<std::size_t>((e + 1) % 4)];
      const double len = distance(a, b);
      if (s <= len || e == 3) {
        out.push_back(a + (b - a) * (std::min(s, len) / len));
        break;
      }
      s -= len;
    }
  }
  return out;
}

namespace {

double box_radius_on(const OrientedBox& b, Vec2 axis) {
  return 0.5 * b.length * std::abs(dot(b.axis_long(), axis)) +
         0.5 * b.width * std::abs(dot(b.axis_lat(), axis));
}

}  // namespace

bool obb_intersects(const OrientedBox& a, const OrientedBox& b) {
  const Vec2 delta = b.center - a.center;
  const std::array<Vec2, 4> axes = {a.axis_long(), a.axis_lat(), b.axis_long(), b.axis_lat()};
  for (const Vec2& axis : axes) {
    const double gap = std::abs(dot(delta, axis));
    if (gap > box_radius_on(a, axis) + box_radius_on(b, axis)) return false;
  }
  return true;
}

double obb_distance(const OrientedBox& a, const OrientedBox& b) {
  if (obb_intersects(a, b)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) {
    const Segment ea{ca[i], ca[(i + 1) % 4]};
    for (std::size_t j = 0; j < 4; ++j) {
      const Segment eb{cb[j], cb[(j + 1) % 4]};
      best = std::min(best, segment_segment_distance(ea, eb));
    }
  }
  return best;
}

int signed_side(const Segment& seg, Vec2 p) {
  const Vec2 dir = seg.b - seg.a;
  if (dir.norm() <= kGeomEps) throw GeometryError("signed_side: degenerate segment");
  const double c = cross(dir, p - seg.a);
  if (std::abs(c) <= kGeomEps * std::max(1.0, dir.norm())) return 0;
  return c > 0 ? 1 : -1;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (std::abs(v) <= kGeomEps) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) - kGeomEps <= p.x && p.x <= std::max(a.x, b.x) + kGeomEps &&
         std::min(a.y, b.y) - kGeomEps <= p.y && p.y <= std::max(a.y, b.y) + kGeomEps;
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
  const int o1 = orientation(s.a, s.b, t.a);
  const int o2 = orientation(s.a, s.b, t.b);
  const int o3 = orientation(t.a, t.b, s.a);
  const int o4 = orientation(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
  return false;
}

double point_segment_distance(Vec2 p, const Segment& seg, double* t_out) {
  const Vec2 d = seg.b - seg.a;
  const double len2 = dot(d, d);
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(dot(p - seg.a, d) / len2, 0.0, 1.0);
  if (t_out != nullptr) *t_out = t;
  return distance(p, seg.a + d * t);
}

double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

double polyline_length(std::span<const Vec2> line) {
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) total += distance(line[i - 1], line[i]);
  return total;
}

std::vector<double> cumulative_lengths(std::span<const Vec2> line) {
  std::vector<double> cum(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) cum[i] = cum[i - 1] + distance(line[i - 1], line[i]);
  return cum;
}

Vec2 point_at_arclength(std::span<const Vec2> line, double s) {
  if (line.empty()) throw ArgumentError("point_at_arclength: empty polyline");
  if (s <= 0.0 || line.size() == 1) return line.front();
  double acc = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const double len = distance(line[i - 1], line[i]);
    if (acc + len >= s && len > 0.0) {
      return line[i - 1] + (line[i] - line[i - 1]) * ((s - acc) / len);
    }
    acc += len;
  }
  return line.back();
}

PolylineProjection project_onto_polyline(std::span<const Vec2> line, Vec2 p) {
  if (line.empty()) throw ArgumentError("project_onto_polyline: empty polyline");
  PolylineProjection best;
  if (line.size() == 1) {
    best.distance = distance(p, line.front());
    best.d = best.distance;
    return best;
  }
  best.distance = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Segment seg{line[i], line[i + 1]};
    const double len = seg.length();
    double t = 0.0;
    const double dist = point_segment_distance(p, seg, &t);
    // Strict improvement keeps the earliest segment on ties.
    if (dist < best.distance - 1e-12) {
      best.distance = dist;
      best.s = acc + t * len;
      best.segment = i;
      const double side = cross(seg.b - seg.a, p - seg.a);
      best.d = side < 0.0 ? -dist : dist;
    }
    acc += len;
  }
  return best;
}

Polyline resample_polyline(std::span<const Vec2> line, double spacing) {
  if (line.empty()) return {};
  if (spacing <= 0.0) throw ArgumentError("resample_polyline: spacing must be positive");
  const double total = polyline_length(line);
  Polyline out;
  out.push_back(line.front());
  for (double s = spacing; s < total - 1e-9; s += spacing) out.push_back(point_at_arclength(line, s));
  if (total > 0.0) {
    if (out.size() > 1 && total - static_cast<double>(out.size() - 1) * spacing < 0.2 * spacing) {
      out.back() = line.back();
    } else {
      out.push_back(line.back());
    }
  }
  return out;
}

bool point_in_polygon(std::span<const Vec2> poly, Vec2 p) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if (point_segment_distance(p, {a, b}) <= kGeomEps) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool polygon_is_simple(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Segment e{poly[i], poly[(i + 1) % n]};
    if (e.length() <= kGeomEps) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      const Segment f{poly[j], poly[(j + 1) % n]};
      if (segments_intersect(e, f)) return false;
    }
  }
  return true;
}

double polygon_area(std::span<const Vec2> poly) {
  double a = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) a += cross(poly[j], poly[i]);
  return 0.5 * a;
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2 p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

std::optional<RayHit> ray_first_hit(Vec2 origin, Vec2 target, std::span<const OrientedBox> obstacles) {
  const double seg_len = distance(origin, target);
  if (seg_len <= kGeomEps) throw ArgumentError("ray_first_hit: origin equals target");
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const OrientedBox& box = obstacles[i];
    if (box.contains(origin)) continue;
    // Liang-Barsky clip in the box frame.
    const Vec2 u = box.axis_long();
    const Vec2 v = box.axis_lat();
    const Vec2 o{dot(origin - box.center, u), dot(origin - box.center, v)};
    const Vec2 t{dot(target - box.center, u), dot(target - box.center, v)};
    const Vec2 d = t - o;
    const double half[2] = {0.5 * box.length, 0.5 * box.width};
    const double org[2] = {o.x, o.y};
    const double dir[2] = {d.x, d.y};
    double t_enter = 0.0;
    double t_exit = 1.0;
    bool miss = false;
    for (int k = 0; k < 2 && !miss; ++k) {
      if (std::abs(dir[k]) < 1e-15) {
        if (std::abs(org[k]) > half[k]) miss = true;
        continue;
      }
      double t0 = (-half[k] - org[k]) / dir[k];
      double t1 = (half[k] - org[k]) / dir[k];
      if (t0 > t1) std::swap(t0, t1);
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
      if (t_enter > t_exit) miss = true;
    }
    if (miss || t_enter >= 1.0) continue;
    const double dist = t_enter * seg_len;
    if (!best || dist < best->distance) best = RayHit{i, dist};
  }
  return best;
}

Vec2 RigidTransform::apply(Vec2 p) const {
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
}

Pose2 RigidTransform::apply(const Pose2& p) const {
  const Vec2 q = apply(p.position());
  return {q.x, q.y, apply_heading(p.heading)};
}

Segment RigidTransform::apply(const Segment& s) const { return {apply(s.a), apply(s.b)}; }

Polyline RigidTransform::apply(std::span<const Vec2> pts) const {
  Polyline out;
  out.reserve(pts.size());
  for (const Vec2& p : pts) out.push_back(apply(p));
  return out;
}

}  // namespace twinbench
