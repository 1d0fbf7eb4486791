#pragma once

#include <optional>
#include <span>

namespace mavi::simworld {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double k, Vec2 a) { return {k * a.x, k * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Segment {
  Vec2 a;
  Vec2 b;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Ray parameter t >= 0 (in units of |dir|) where origin + t*dir meets the segment.
/// Parallel and collinear configurations report no hit.
std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& s);

/// Nearest hit over all segments.
std::optional<double> ray_cast(Vec2 origin, Vec2 dir, std::span<const Segment> segments);

double point_segment_distance(Vec2 p, const Segment& s);

/// Largest fraction in [0, 1] of the displacement a disc of `radius` centred at
/// `center` can travel before touching the segment. Motion that does not close
/// the gap to the segment is never blocked.
double disc_sweep_fraction(Vec2 center, Vec2 displacement, double radius, const Segment& s);

}  // namespace mavi::simworld
