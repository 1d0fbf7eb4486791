#include "mavi/simworld/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mavi::simworld {

std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double denom = cross(dir, e);
  if (denom == 0.0) return std::nullopt;
  const Vec2 w = s.a - origin;
  const double t = cross(w, e) / denom;
  const double u = cross(w, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_cast(Vec2 origin, Vec2 dir, std::span<const Segment> segments) {
  std::optional<double> best;
  for (const auto& s : segments) {
    if (auto t = ray_segment_hit(origin, dir, s); t && (!best || *t < *best)) best = t;
  }
  return best;
}

double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 e = s.b - s.a;
  const double len2 = dot(e, e);
  double u = len2 > 0.0 ? dot(p - s.a, e) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  const Vec2 q = s.a + u * e;
  return std::hypot(p.x - q.x, p.y - q.y);
}

namespace {

// Earliest t in [0, 1] at which |center + t*d - point| == radius while approaching.
double sweep_against_point(Vec2 c, Vec2 d, double radius, Vec2 point) {
  const Vec2 f = c - point;
  const double a = dot(d, d);
  const double b = dot(f, d);
  if (a == 0.0 || b >= 0.0) return 1.0;
  const double cc = dot(f, f) - radius * radius;
  if (cc <= 0.0) return 0.0;
  const double disc = b * b - a * cc;
  if (disc < 0.0) return 1.0;
  const double t = (-b - std::sqrt(disc)) / a;
  return t >= 0.0 && t <= 1.0 ? t : 1.0;
}

}  // namespace

double disc_sweep_fraction(Vec2 c, Vec2 d, double radius, const Segment& s) {
  double best = 1.0;
  const Vec2 e = s.b - s.a;
  const double len = std::hypot(e.x, e.y);
  if (len > 0.0) {
    Vec2 n{-e.y / len, e.x / len};
    double gap = dot(c - s.a, n);
    if (gap < 0.0) {
      n = -1.0 * n;
      gap = -gap;
    }
    const double closing = dot(d, n);
    if (closing < 0.0) {
      // Contact with the segment interior happens when the signed gap reaches radius.
      const double t = gap <= radius ? 0.0 : (gap - radius) / -closing;
      if (t <= 1.0) {
        const Vec2 p = c + t * d;
        const double u = dot(p - s.a, e) / (len * len);
        if (u >= 0.0 && u <= 1.0) best = std::min(best, t);
      }
    }
  }
  best = std::min(best, sweep_against_point(c, d, radius, s.a));
  best = std::min(best, sweep_against_point(c, d, radius, s.b));
  return best;
}

}  // namespace mavi::simworld
